"""Device arithmetic: presets, derived frequencies, couplings, leakage."""

import numpy as np
import pytest

from hybridmem.device import (
    CbjjParams,
    NveParams,
    TlrParams,
    coupling_gtc,
    derive_dispersive,
    derive_resonant,
    dispersive_point,
    effective_eta,
    ensemble_coupling,
    leakage_probability,
    mode_profile,
    model_time_to_seconds,
    plasma_frequency,
    qubit_levels,
    resonant_point,
    resonator_frequency,
    to_model_units,
)

TWO_PI = 2.0 * np.pi


def test_level_ratios_exact():
    omega_p = 2 * np.pi * 3.2e9
    w10, w21, xi = qubit_levels(omega_p)
    assert w10 == pytest.approx(0.9 * omega_p, rel=1e-15)
    assert w21 == pytest.approx(0.81 * omega_p, rel=1e-15)
    assert xi == pytest.approx(w10 / 10.0, rel=1e-12)


def test_qubit_frequency_resonant_preset():
    cbjj, _, _ = resonant_point()
    w10 = qubit_levels(plasma_frequency(cbjj))[0]
    assert w10 / TWO_PI == pytest.approx(2.87e9, rel=0.01)


def test_qubit_frequency_dispersive_preset():
    cbjj = dispersive_point()["cbjj"]
    w10 = qubit_levels(plasma_frequency(cbjj))[0]
    assert w10 / TWO_PI == pytest.approx(2.87e9, rel=0.01)


def test_plasma_frequency_vanishes_at_critical_bias():
    base = CbjjParams(i_bias=0.9 * 67e-6, i_critical=67e-6,
                      c_junction=71.5e-12)
    previous = plasma_frequency(base)
    for frac in (0.99, 0.999, 0.9999):
        w = plasma_frequency(CbjjParams(i_bias=frac * 67e-6,
                                        i_critical=67e-6,
                                        c_junction=71.5e-12))
        assert w < previous
        previous = w
    with pytest.raises(ValueError):
        plasma_frequency(CbjjParams(i_bias=67e-6, i_critical=67e-6,
                                    c_junction=71.5e-12))


def test_bare_resonator_frequency():
    # without capacitive loading the full-wave mode sits at 2.87 GHz
    bare = TlrParams(inductance=60.7e-9, capacitance=2e-12)
    omega_c, delta_0 = resonator_frequency(bare)
    assert omega_c / TWO_PI == pytest.approx(2.87e9, rel=0.005)
    assert delta_0 == 0.0


def test_loaded_resonator_shift_and_phase():
    _, tlr, _ = resonant_point()
    omega_c, delta_0 = resonator_frequency(tlr)
    bare, _ = resonator_frequency(TlrParams(inductance=60.7e-9,
                                            capacitance=2e-12))
    # coupling capacitor pulls the mode down by epsilon_2 = C_c/C_t = 3%
    assert omega_c == pytest.approx(bare * (1.0 - 0.03), rel=1e-12)
    assert delta_0 == pytest.approx(np.arctan(TWO_PI * 0.03), rel=1e-12)


def test_epsilon_guard():
    with pytest.raises(ValueError):
        TlrParams(inductance=60.7e-9, capacitance=2e-12,
                  c_coupling=0.25e-12)  # epsilon_2 = 0.125


def test_coupling_rate_resonant_preset():
    cbjj, tlr, _ = resonant_point()
    omega_c, delta_0 = resonator_frequency(tlr)
    g = coupling_gtc(tlr, cbjj, omega_c, delta_0)
    assert g / TWO_PI == pytest.approx(10e6, rel=0.05)
    assert g / TWO_PI == pytest.approx(9.70e6, rel=0.01)  # frozen value


def test_ensemble_coupling_scaling():
    n0 = NveParams(n_centers=1e12)
    assert ensemble_coupling(n0) / TWO_PI == pytest.approx(10e6, rel=1e-9)
    quadrupled = NveParams(n_centers=4e12)
    assert ensemble_coupling(quadrupled) == pytest.approx(
        2.0 * ensemble_coupling(n0), rel=1e-12)


def test_effective_eta_quoted_point():
    g = TWO_PI * 50e6
    delta = TWO_PI * 250e6
    eta = effective_eta(g, g, delta, delta)
    assert eta / TWO_PI == pytest.approx(10e6, rel=1e-12)


def test_effective_eta_asymmetric_average():
    # eta = g_tc g_td (1/2Delta_tc + 1/2Delta_td)
    eta = effective_eta(0.2, 0.3, 4.0, 6.0)
    assert eta == pytest.approx(0.06 * (1 / 8 + 1 / 12), rel=1e-12)


def test_effective_eta_guards():
    with pytest.raises(ValueError):
        effective_eta(1.0, 1.0, 0.0, 5.0)
    with pytest.warns(UserWarning):
        effective_eta(2.0, 2.0, 5.0, 5.0)  # g/Delta = 0.4, not dispersive


def test_leakage_window():
    w10 = TWO_PI * 2.87e9
    leak = leakage_probability(TWO_PI * 10e6, w10 / 10.0)
    assert 1.0e-3 <= leak <= 1.5e-3
    with pytest.raises(ValueError):
        leakage_probability(TWO_PI * 10e6, 0.0)


def test_mode_profile_energy_identity():
    tlr = TlrParams(inductance=60.7e-9, capacitance=2e-12,
                    c_coupling=60e-15, length=0.012)
    omega_c, delta_0 = resonator_frequency(tlr)
    x = np.linspace(0.0, tlr.length, 101)
    v, i = mode_profile(x, tlr, omega_c, delta_0)
    hbar_omega = 1.054571817e-34 * omega_c
    energy = tlr.capacitance * v**2 + tlr.inductance * i**2
    assert np.allclose(energy, hbar_omega, rtol=1e-10)
    # voltage node where the phase hits pi/2
    k = TWO_PI / tlr.length
    x_node = (np.pi / 2.0 - delta_0) / k
    v_node, _ = mode_profile(x_node, tlr, omega_c, delta_0)
    assert abs(v_node) < 1e-12 * np.max(np.abs(v))


def test_mode_profile_needs_length():
    tlr = TlrParams(inductance=60.7e-9, capacitance=2e-12)
    with pytest.raises(ValueError):
        mode_profile(0.0, tlr, TWO_PI * 2.87e9, 0.0)


def test_derive_resonant_record():
    d = derive_resonant(*resonant_point())
    assert d.omega_10 / TWO_PI == pytest.approx(2.87e9, rel=0.01)
    assert d.g_tc / TWO_PI == pytest.approx(10e6, rel=0.05)
    assert d.g_td / TWO_PI == pytest.approx(10e6, rel=1e-9)
    assert d.eta is None
    assert 1.0e-3 <= d.leakage <= 1.5e-3


def test_derive_dispersive_record():
    d = derive_dispersive(**dispersive_point())
    assert d.eta / TWO_PI == pytest.approx(10e6, rel=1e-12)
    assert d.omega_c == pytest.approx(d.omega_10 - TWO_PI * 250e6, rel=1e-12)


def test_unit_conversions_round_trip():
    g0 = TWO_PI * 9.7e6
    assert to_model_units(TWO_PI * 0.097e6, g0) == pytest.approx(0.01)
    t_model = np.pi / np.sqrt(2.0)
    t_s = model_time_to_seconds(t_model, g0)
    assert t_s * g0 == pytest.approx(t_model, rel=1e-12)
    assert t_s == pytest.approx(36.4e-9, rel=0.01)  # tens of ns, desk sanity
    with pytest.raises(ValueError):
        to_model_units(1.0, 0.0)


def test_cbjj_param_guards():
    with pytest.raises(ValueError):
        CbjjParams(i_bias=-1e-6, i_critical=67e-6, c_junction=1e-12)
    with pytest.raises(ValueError):
        CbjjParams(i_bias=68e-6, i_critical=67e-6, c_junction=1e-12)
