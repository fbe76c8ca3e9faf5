"""Device-parameter arithmetic in SI units.

Maps junction, resonator and spin-ensemble fabrication parameters to the
frequencies and couplings the simulator consumes. All angular frequencies
are rad/s; divide by 2*pi for Hz. Model-unit conversion helpers live at
the bottom: simulations run with the relevant coupling set to 1.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

# Magnetic flux quantum h/2e in Wb and hbar in J*s.
PHI_0 = 2.067833848e-15
HBAR = 1.054571817e-34

# Ratios fixed by the cubic-well level structure of the biased junction.
LEVEL_RATIO_10 = 0.9    # omega_10 / omega_p
LEVEL_RATIO_21 = 0.81   # omega_21 / omega_p

DISPERSIVE_VALIDITY_RATIO = 0.3


@dataclass(frozen=True)
class CbjjParams:
    """Current-biased Josephson junction: bias and critical currents (A),
    junction capacitance (F)."""

    i_bias: float
    i_critical: float
    c_junction: float

    def __post_init__(self):
        if self.i_critical <= 0:
            raise ValueError("critical current must be positive")
        if not 0 < self.i_bias < self.i_critical:
            raise ValueError(
                f"bias current {self.i_bias} must sit in (0, I_c)"
            )
        if self.c_junction <= 0:
            raise ValueError("junction capacitance must be positive")


@dataclass(frozen=True)
class TlrParams:
    """Transmission-line resonator: total inductance (H), total capacitance
    (F), wiring and coupling capacitances (F), optional length (m)."""

    inductance: float
    capacitance: float
    c_wiring: float = 0.0
    c_coupling: float = 0.0
    length: float | None = None

    def __post_init__(self):
        if self.inductance <= 0 or self.capacitance <= 0:
            raise ValueError("inductance and capacitance must be positive")
        if self.c_wiring < 0 or self.c_coupling < 0:
            raise ValueError("parasitic capacitances cannot be negative")
        if self.length is not None and self.length <= 0:
            raise ValueError("length must be positive when given")
        # The renormalized-mode expansion only holds for small loading.
        if self.epsilon_wiring >= 0.1 or self.epsilon_coupling >= 0.1:
            raise ValueError(
                f"capacitive loading too large: eps1={self.epsilon_wiring:.3f}"
                f", eps2={self.epsilon_coupling:.3f} (need < 0.1)"
            )

    @property
    def epsilon_wiring(self) -> float:
        return 2.0 * self.c_wiring / self.capacitance

    @property
    def epsilon_coupling(self) -> float:
        return self.c_coupling / self.capacitance


@dataclass(frozen=True)
class NveParams:
    """Nitrogen-vacancy ensemble treated as one collective qubit.

    n_centers is the number of spins, g_single the single-spin coupling
    (rad/s), omega_eg the zero-field splitting (rad/s, default
    2*pi*2.87 GHz).
    """

    n_centers: float = 1e12
    g_single: float = 2 * np.pi * 10.0
    omega_eg: float = 2 * np.pi * 2.87e9

    def __post_init__(self):
        if self.n_centers < 1:
            raise ValueError("ensemble needs at least one center")
        if self.g_single <= 0:
            raise ValueError("single-spin coupling must be positive")
        if self.omega_eg <= 0:
            raise ValueError("level splitting must be positive")


@dataclass(frozen=True)
class DerivedFrequencies:
    """Derived operating point, rad/s throughout. Fields that cannot be
    derived from the supplied inputs are None."""

    omega_p: float
    omega_10: float
    omega_21: float
    xi: float
    omega_c: float | None = None
    delta_0: float | None = None
    g_tc: float | None = None
    g_td: float | None = None
    eta: float | None = None
    leakage: float | None = None


def plasma_frequency(p: CbjjParams) -> float:
    """Plasma frequency of the biased junction's washboard well (rad/s)."""
    if p.i_bias >= p.i_critical:
        raise ValueError("bias current must stay below the critical current")
    drive = 2.0 * np.pi * p.i_critical / (PHI_0 * p.c_junction)
    return float(((2.0 - 2.0 * p.i_bias / p.i_critical) * drive**2) ** 0.25)


def qubit_levels(omega_p: float) -> tuple[float, float, float]:
    """(omega_10, omega_21, xi) for the two lowest junction transitions.

    The anharmonicity gap xi = omega_10 - omega_21 equals omega_10/10
    exactly under the fixed level ratios.
    """
    omega_10 = LEVEL_RATIO_10 * omega_p
    omega_21 = LEVEL_RATIO_21 * omega_p
    return omega_10, omega_21, omega_10 - omega_21


def resonator_frequency(p: TlrParams) -> tuple[float, float]:
    """Full-wave mode frequency and boundary phase shift (omega_c, delta_0).

    Capacitive loading renormalizes the bare 2*pi/sqrt(F_t*C_t) mode and
    tilts the mode function by delta_0 = arctan(2*pi*eps2).
    """
    eps1 = p.epsilon_wiring
    eps2 = p.epsilon_coupling
    omega_c = 2.0 * np.pi * (1.0 - eps1 - eps2) / np.sqrt(
        p.inductance * p.capacitance)
    delta_0 = float(np.arctan(2.0 * np.pi * eps2))
    return float(omega_c), delta_0


def coupling_gtc(
    tlr: TlrParams, cbjj: CbjjParams, omega_c: float, delta_0: float
) -> float:
    """CBJJ-resonator coupling rate (rad/s) at the coupled end."""
    norm = np.sqrt(2.0 * tlr.capacitance * (cbjj.c_junction + tlr.c_coupling))
    return float(omega_c * tlr.c_coupling * np.cos(delta_0) / norm)


def ensemble_coupling(nve: NveParams) -> float:
    """Collective coupling sqrt(N) * g_single (rad/s)."""
    return float(np.sqrt(nve.n_centers) * nve.g_single)


def effective_eta(
    g_tc: float, g_td: float, delta_tc: float, delta_td: float
) -> float:
    """Virtual-photon exchange rate between junction and ensemble (rad/s).

    eta = g_tc*g_td*(1/(2*delta_tc) + 1/(2*delta_td)). Raises on zero
    detuning; warns when either g/|delta| exceeds 0.3, outside the
    dispersive regime the formula assumes.
    """
    if delta_tc == 0.0 or delta_td == 0.0:
        raise ValueError("effective coupling undefined at zero detuning")
    ratio = max(abs(g_tc / delta_tc), abs(g_td / delta_td))
    if ratio > DISPERSIVE_VALIDITY_RATIO:
        warnings.warn(
            f"g/|delta| = {ratio:.3f} exceeds {DISPERSIVE_VALIDITY_RATIO}; "
            "dispersive result is unreliable",
            stacklevel=2,
        )
    return float(g_tc * g_td * (0.5 / delta_tc + 0.5 / delta_td))


def leakage_probability(g_tc: float, xi: float) -> float:
    """Population leakage out of the qubit subspace via the third level."""
    if xi <= 0:
        raise ValueError("level separation must be positive")
    return float(g_tc**2 / (g_tc**2 + xi**2))


def mode_profile(
    x: float | np.ndarray, tlr: TlrParams, omega_c: float, delta_0: float
) -> tuple[np.ndarray, np.ndarray]:
    """Voltage and current amplitude envelopes along the resonator.

    V(x) = sqrt(hbar*omega_c/C_t) * cos(k x + delta_0) and
    I(x) = sqrt(hbar*omega_c/F_t) * sin(k x + delta_0) with k = 2*pi/L.
    Requires tlr.length; positions must satisfy 0 <= x <= L.
    """
    if tlr.length is None:
        raise ValueError("mode profile needs the resonator length")
    xs = np.asarray(x, dtype=float)
    if np.any(xs < 0) or np.any(xs > tlr.length):
        raise ValueError("positions must lie within [0, length]")
    k = 2.0 * np.pi / tlr.length
    v_amp = np.sqrt(HBAR * omega_c / tlr.capacitance) * np.cos(k * xs + delta_0)
    i_amp = np.sqrt(HBAR * omega_c / tlr.inductance) * np.sin(k * xs + delta_0)
    return v_amp, i_amp


# ---------------------------------------------------------------------------
# Reference parameter sets (resonant and dispersive operating points).

def resonant_point() -> tuple[CbjjParams, TlrParams, NveParams]:
    """Fabrication parameters that put the junction on resonance with the
    full-wave mode at 2.87 GHz with g_tc/2pi near 10 MHz."""
    cbjj = CbjjParams(i_bias=0.99 * 67e-6, i_critical=67e-6,
                      c_junction=71.5e-12)
    tlr = TlrParams(inductance=60.7e-9, capacitance=2e-12,
                    c_wiring=0.0, c_coupling=60e-15)
    return cbjj, tlr, NveParams()


def dispersive_point() -> dict:
    """Operating point for the virtual-photon protocol: both couplings
    2*pi*50 MHz, both detunings 2*pi*250 MHz, eta/2pi = 10 MHz."""
    cbjj = CbjjParams(i_bias=0.99 * 2.177e-6, i_critical=2.177e-6,
                      c_junction=2.3e-12)
    g = 2 * np.pi * 50e6
    delta = 2 * np.pi * 250e6
    return {
        "cbjj": cbjj,
        "nve": NveParams(),
        "g_tc": g,
        "g_td": g,
        "delta_tc": delta,
        "delta_td": delta,
    }


def derive_resonant(
    cbjj: CbjjParams, tlr: TlrParams, nve: NveParams
) -> DerivedFrequencies:
    """Full derived record for a resonant operating point (eta undefined)."""
    omega_p = plasma_frequency(cbjj)
    omega_10, omega_21, xi = qubit_levels(omega_p)
    omega_c, delta_0 = resonator_frequency(tlr)
    g_tc = coupling_gtc(tlr, cbjj, omega_c, delta_0)
    return DerivedFrequencies(
        omega_p=omega_p, omega_10=omega_10, omega_21=omega_21, xi=xi,
        omega_c=omega_c, delta_0=delta_0, g_tc=g_tc,
        g_td=ensemble_coupling(nve), eta=None,
        leakage=leakage_probability(g_tc, xi),
    )


def derive_dispersive(
    cbjj: CbjjParams, nve: NveParams,
    g_tc: float, g_td: float, delta_tc: float, delta_td: float,
) -> DerivedFrequencies:
    """Derived record for a detuned operating point with quoted couplings."""
    omega_p = plasma_frequency(cbjj)
    omega_10, omega_21, xi = qubit_levels(omega_p)
    return DerivedFrequencies(
        omega_p=omega_p, omega_10=omega_10, omega_21=omega_21, xi=xi,
        omega_c=omega_10 - delta_tc, delta_0=None,
        g_tc=g_tc, g_td=g_td,
        eta=effective_eta(g_tc, g_td, delta_tc, delta_td),
        leakage=leakage_probability(g_tc, xi),
    )


# ---------------------------------------------------------------------------
# Unit conversions between SI and simulation (model) units. Model units fix
# a reference coupling to 1, so times are (reference rate) * t.

def to_model_units(omega_rad_s: float, reference_rad_s: float) -> float:
    """Express a rate as a multiple of the reference coupling."""
    if reference_rad_s <= 0:
        raise ValueError("reference rate must be positive")
    return omega_rad_s / reference_rad_s


def model_time_to_seconds(t_model: float, reference_rad_s: float) -> float:
    """Convert a dimensionless model time to seconds."""
    if reference_rad_s <= 0:
        raise ValueError("reference rate must be positive")
    return t_model / reference_rad_s
