"""Open-system evolution: channels, RK4 route, exact route, diagnostics."""

import numpy as np
import pytest

from hybridmem.hamiltonian import chain_layout, h_exchange, h_resonant, reduced_layout
from hybridmem.hilbert import DensityMatrix, Operator, SpaceLayout, basis_ket, superpose
from hybridmem.lindblad import (
    CollapseChannel,
    DecoherenceRates,
    EvolutionConfig,
    IntegrationError,
    build_channels,
    dissipator,
    evolve_exact,
    evolve_rk4,
    hygiene_report,
    liouvillian,
    master_rhs,
)


def test_rates_guards():
    with pytest.raises(ValueError):
        DecoherenceRates(kappa=-0.1)
    assert not DecoherenceRates.zero().any_nonzero()
    assert DecoherenceRates(gamma_phi=0.1).any_nonzero()


def test_build_channels_prefactors():
    layout = chain_layout(2)
    rates = DecoherenceRates(kappa=0.04, gamma_10=0.02, gamma_1=0.01,
                             gamma_phi=0.06)
    channels = build_channels(rates, layout)
    assert len(channels) == 3
    # photon loss at kappa/2, combined relaxation at (gamma_10+gamma_1)/2,
    # dephasing at gamma_phi/2
    assert channels[0].prefactor == pytest.approx(0.02)
    assert channels[1].prefactor == pytest.approx(0.015)
    assert channels[2].prefactor == pytest.approx(0.03)
    assert build_channels(DecoherenceRates.zero(), layout) == []


def test_kappa_needs_photon_slot():
    with pytest.raises(ValueError):
        build_channels(DecoherenceRates(kappa=0.1), reduced_layout())
    # junction-only rates are fine on the reduced layout
    assert len(build_channels(DecoherenceRates(gamma_10=0.1),
                              reduced_layout())) == 1


def test_photon_number_decays_at_kappa():
    # d<n>/dt = -kappa <n> under (kappa/2) D[a]
    layout = SpaceLayout((3,), ("tlr",))
    kappa = 0.8
    from hybridmem.hilbert import annihilation
    a = Operator(annihilation(3).matrix, layout)
    channels = [CollapseChannel(a, kappa / 2.0)]
    h = Operator(np.zeros((3, 3)), layout)
    rho0 = basis_ket(layout, (2,)).density_matrix()
    t = 0.7
    rho_t = evolve_exact(rho0, h, channels, t)
    n_op = a.dag() @ a
    n_t = np.real(np.trace(n_op.matrix @ rho_t.matrix))
    assert n_t == pytest.approx(2.0 * np.exp(-kappa * t), rel=1e-10)


def test_relaxation_and_dephasing_rates():
    layout = SpaceLayout((2,), ("cbjj",))
    gamma, phi = 0.3, 0.2
    channels = build_channels(DecoherenceRates(gamma_10=gamma,
                                               gamma_phi=phi), layout)
    h = Operator(np.zeros((2, 2)), layout)
    plus = superpose([(np.sqrt(0.5), basis_ket(layout, (0,))),
                      (np.sqrt(0.5), basis_ket(layout, (1,)))])
    t = 0.9
    rho_t = evolve_exact(plus.density_matrix(), h, channels, t)
    # excited population: e^{-gamma t} from 1/2
    assert rho_t.matrix[1, 1].real == pytest.approx(
        0.5 * np.exp(-gamma * t), rel=1e-10)
    # coherence: relaxation contributes gamma/2, dephasing 2*gamma_phi
    expected = 0.5 * np.exp(-(gamma / 2.0 + 2.0 * phi) * t)
    assert abs(rho_t.matrix[0, 1]) == pytest.approx(expected, rel=1e-10)


def test_dissipator_traceless_and_hermitian_rhs():
    rng = np.random.default_rng(21)
    layout = reduced_layout()
    h = h_exchange(1.0)
    channels = build_channels(DecoherenceRates(gamma_10=0.1,
                                               gamma_phi=0.05), layout)
    for _ in range(10):
        m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        rho = m @ m.conj().T
        rho = rho / np.trace(rho)
        out = master_rhs(h, channels, rho)
        assert abs(np.trace(out)) < 1e-12
        assert np.max(np.abs(out - out.conj().T)) < 1e-12
        a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        assert abs(np.trace(dissipator(a, rho))) < 1e-10


def test_liouvillian_matches_rhs_definition():
    rng = np.random.default_rng(22)
    layout = reduced_layout()
    hm = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    h = Operator(hm + hm.conj().T, layout)
    channels = build_channels(
        DecoherenceRates(gamma_10=0.2, gamma_1=0.1, gamma_phi=0.3), layout)
    lv = liouvillian(h, channels)
    for _ in range(10):
        m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        rho = m @ m.conj().T
        rho = rho / np.trace(rho)
        direct = master_rhs(h, channels, rho)
        via_l = (lv @ rho.flatten(order="F")).reshape((4, 4), order="F")
        assert np.max(np.abs(direct - via_l)) < 1e-12


def test_liouvillian_spectrum_is_stable():
    # no eigenvalue of the generator may sit in the right half plane
    layout = chain_layout(2)
    h = h_resonant(1.0, 1.0)
    channels = build_channels(
        DecoherenceRates(kappa=0.05, gamma_10=0.02, gamma_phi=0.01), layout)
    evals = np.linalg.eigvals(liouvillian(h, channels))
    assert np.max(evals.real) < 1e-10


def test_liouvillian_dimension_guard():
    big = h_resonant(1.0, 1.0, n_max=31)   # dim 128 > 64
    with pytest.raises(ValueError):
        liouvillian(big, [])


def test_rk4_matches_exact_route():
    layout = chain_layout(2)
    h = h_resonant(1.0, 1.0)
    channels = build_channels(
        DecoherenceRates(kappa=0.01, gamma_10=0.01, gamma_1=0.01,
                         gamma_phi=0.01), layout)
    rho0 = superpose([
        (np.sqrt(0.5), basis_ket(layout, (0, 0, 0))),
        (np.sqrt(0.5), basis_ket(layout, (1, 0, 0))),
    ]).density_matrix()
    t = np.pi / np.sqrt(2.0)
    config = EvolutionConfig.plan(t, 10, dt_target=1e-3)
    traj = evolve_rk4(rho0, h, channels, config)
    exact = evolve_exact(rho0, h, channels, t)
    assert np.max(np.abs(traj.raw_states[-1] - exact.matrix)) < 1e-8


def test_closed_evolution_preserves_purity():
    layout = reduced_layout()
    rho0 = basis_ket(layout, (1, 0)).density_matrix()
    config = EvolutionConfig.plan(2.0, 20, dt_target=1e-3)
    traj = evolve_rk4(rho0, h_exchange(1.0), [], config)
    final = traj.raw_states[-1]
    assert np.trace(final @ final).real == pytest.approx(1.0, abs=1e-10)


def test_plan_places_records_exactly():
    config = EvolutionConfig.plan(3.0 * np.pi / np.sqrt(2.0), 600,
                                  dt_target=1e-3)
    assert config.dt <= 1e-3 + 1e-15
    assert config.n_steps == 600 * config.record_stride
    assert config.record_stride * config.dt == pytest.approx(
        3.0 * np.pi / np.sqrt(2.0) / 600, rel=1e-15)


def test_config_validation():
    with pytest.raises(ValueError):
        EvolutionConfig(dt=0.3, t_final=1.0)       # 3.33 steps
    with pytest.raises(ValueError):
        EvolutionConfig(dt=0.1, t_final=1.0, record_stride=3)  # 10 % 3
    with pytest.raises(ValueError):
        EvolutionConfig(dt=0.1, t_final=1.0, renorm="sometimes")
    with pytest.raises(ValueError):
        EvolutionConfig.plan(0.0, 10)


def test_spectral_step_guard():
    layout = reduced_layout()
    rho0 = basis_ket(layout, (1, 0)).density_matrix()
    config = EvolutionConfig(dt=0.1, t_final=1.0)
    with pytest.raises(ValueError, match="dt"):
        evolve_rk4(rho0, h_exchange(10.0), [], config)   # dt*|H| = 1


def test_abort_on_blowup():
    # a stiff rate far outside the stable step region must abort, not
    # return garbage
    layout = SpaceLayout((2,), ("cbjj",))
    h = Operator(np.zeros((2, 2)), layout)
    channels = build_channels(DecoherenceRates(gamma_phi=2000.0), layout)
    plus = superpose([(np.sqrt(0.5), basis_ket(layout, (0,))),
                      (np.sqrt(0.5), basis_ket(layout, (1,)))])
    config = EvolutionConfig(dt=0.01, t_final=1.0)
    with pytest.raises(IntegrationError) as err:
        evolve_rk4(plus.density_matrix(), h, channels, config)
    assert err.value.time > 0


def test_renorm_policy_restores_trace():
    layout = SpaceLayout((2,), ("cbjj",))
    h = Operator(np.zeros((2, 2)), layout)
    channels = build_channels(DecoherenceRates(gamma_10=0.5), layout)
    rho0 = basis_ket(layout, (1,)).density_matrix()
    cfg = EvolutionConfig.plan(1.0, 10, dt_target=0.05, renorm="records")
    traj = evolve_rk4(rho0, h, channels, cfg)
    assert np.max(traj.diagnostics["trace_error"]) < 1e-12


def test_hygiene_report_clean_run():
    layout = chain_layout(2)
    rho0 = basis_ket(layout, (1, 0, 0)).density_matrix()
    channels = build_channels(DecoherenceRates(kappa=0.02), layout)
    cfg = EvolutionConfig.plan(2.0, 20, dt_target=1e-3)
    rep = hygiene_report(evolve_rk4(rho0, h_resonant(1.0, 1.0), channels, cfg))
    assert rep["all_ok"]
    assert rep["trace_error"] <= 1e-9
    assert rep["top_fock"] <= 1e-10


def test_top_fock_flags_truncation_pressure():
    # with the photon space cut at one level, the transfer drives the top
    # level directly and the hygiene flag must trip
    layout = chain_layout(1)
    rho0 = basis_ket(layout, (1, 0, 0)).density_matrix()
    cfg = EvolutionConfig.plan(2.0, 20, dt_target=1e-3)
    rep = hygiene_report(evolve_rk4(rho0, h_resonant(1.0, 1.0, n_max=1),
                                    [], cfg))
    assert not rep["top_fock_ok"]
    assert rep["top_fock"] > 0.1


def test_trajectory_accessors():
    layout = reduced_layout()
    rho0 = basis_ket(layout, (1, 0)).density_matrix()
    cfg = EvolutionConfig.plan(np.pi / 2.0, 5, dt_target=1e-2)
    traj = evolve_rk4(rho0, h_exchange(1.0), [], cfg)
    assert len(traj.times) == 6            # includes t = 0
    assert traj.times[0] == 0.0
    state = traj.final_state               # revalidates through DensityMatrix
    assert state.trace_error() < 1e-12
    series = traj.fidelity_series(basis_ket(layout, (0, 1)))
    assert series[-1] == pytest.approx(1.0, abs=1e-9)
    from hybridmem.hilbert import identity
    with pytest.raises(ValueError):
        traj.expectation(identity(chain_layout(2)))


def test_evolve_exact_rejects_negative_time():
    layout = reduced_layout()
    rho0 = basis_ket(layout, (0, 0)).density_matrix()
    with pytest.raises(ValueError):
        evolve_exact(rho0, h_exchange(1.0), [], -1.0)
