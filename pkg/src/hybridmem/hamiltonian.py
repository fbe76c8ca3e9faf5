"""Hamiltonian builders for the junction / resonator / ensemble chain.

All builders work in model units: pass frequencies and couplings already
scaled by the reference rate (the resonant coupling for transfer runs,
the exchange rate for dispersive and multi-ensemble runs). The composite
ordering is always (cbjj, tlr, nve) or (cbjj, nve...) when the resonator
has been eliminated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import (
    Operator,
    SpaceLayout,
    annihilation,
    embed,
    identity,
    qubit_ops,
)

# Minimum |detuning|/coupling for the vacuum-reduced builders to be trusted.
DISPERSIVE_MIN_RATIO = 3.0


@dataclass(frozen=True)
class ModelParams:
    """Frequencies and couplings in model units.

    delta_tc and delta_td (qubit and ensemble detunings from the
    resonator) are derived, not stored.
    """

    omega_10: float
    omega_c: float
    omega_eg: float
    g_tc: float
    g_td: float
    n_max: int = 2

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("need at least one photon level above vacuum")
        if self.g_tc < 0 or self.g_td < 0:
            raise ValueError("couplings cannot be negative")

    @property
    def delta_tc(self) -> float:
        return self.omega_10 - self.omega_c

    @property
    def delta_td(self) -> float:
        return self.omega_eg - self.omega_c

    def eta(self) -> float:
        """Virtual-exchange rate implied by the detunings."""
        if self.delta_tc == 0.0 or self.delta_td == 0.0:
            raise ValueError("exchange rate undefined at zero detuning")
        return self.g_tc * self.g_td * (0.5 / self.delta_tc
                                        + 0.5 / self.delta_td)


def chain_layout(n_max: int) -> SpaceLayout:
    """(cbjj, tlr, nve) with the photon space truncated at n_max."""
    return SpaceLayout((2, n_max + 1, 2), ("cbjj", "tlr", "nve"))


def reduced_layout() -> SpaceLayout:
    """(cbjj, nve) after the resonator is eliminated."""
    return SpaceLayout((2, 2), ("cbjj", "nve"))


def multi_layout(n_ensembles: int) -> SpaceLayout:
    """(cbjj, nve1, ..., nveN)."""
    if n_ensembles < 1:
        raise ValueError("need at least one ensemble")
    labels = ("cbjj",) + tuple(f"nve{i+1}" for i in range(n_ensembles))
    return SpaceLayout((2,) * (n_ensembles + 1), labels)


def _chain_ops(n_max: int):
    layout = chain_layout(n_max)
    q = qubit_ops()
    a = embed(annihilation(n_max + 1), layout.slot("tlr"), layout)
    sp_c = embed(q["sigma_plus"], layout.slot("cbjj"), layout)
    sp_d = embed(q["sigma_plus"], layout.slot("nve"), layout)
    return layout, a, sp_c, sp_d, q


def h_total(p: ModelParams) -> Operator:
    """Full lab-frame Hamiltonian of the three-body chain."""
    layout, a, sp_c, sp_d, q = _chain_ops(p.n_max)
    sz_c = embed(q["sigma_z"], layout.slot("cbjj"), layout)
    sz_d = embed(q["sigma_z"], layout.slot("nve"), layout)
    n_ph = a.dag() @ a
    h = (0.5 * p.omega_10 * sz_c + p.omega_c * n_ph + 0.5 * p.omega_eg * sz_d
         + p.g_tc * (sp_c @ a + (sp_c @ a).dag())
         + p.g_td * (sp_d @ a + (sp_d @ a).dag()))
    return h


def h_resonant(g_tc: float, g_td: float, n_max: int = 2) -> Operator:
    """Interaction Hamiltonian in the frame rotating at the common
    frequency of the resonant chain; the diagonal terms drop out."""
    layout, a, sp_c, sp_d, _ = _chain_ops(n_max)
    h = (g_tc * (sp_c @ a + (sp_c @ a).dag())
         + g_td * (sp_d @ a + (sp_d @ a).dag()))
    return h


def _check_dispersive(p: ModelParams, allow_nondispersive: bool):
    for g, delta, name in ((p.g_tc, p.delta_tc, "cbjj"),
                           (p.g_td, p.delta_td, "nve")):
        if delta == 0.0:
            raise ValueError(f"{name} detuning is zero, not dispersive")
        if g > 0 and abs(delta) / g < DISPERSIVE_MIN_RATIO:
            if not allow_nondispersive:
                raise ValueError(
                    f"|delta|/g = {abs(delta) / g:.2f} for {name} is below "
                    f"{DISPERSIVE_MIN_RATIO}; pass allow_nondispersive=True "
                    "to build anyway"
                )


def h_dispersive(
    p: ModelParams,
    vacuum_reduced: bool = False,
    allow_nondispersive: bool = False,
) -> Operator:
    """Second-order effective Hamiltonian in the detuned regime.

    With vacuum_reduced=False the photon mode is kept: level shifts
    proportional to sigma^z a^dag a appear for both qubits along with the
    exchange term. With vacuum_reduced=True the resonator is dropped
    (valid when it starts in vacuum) and only the Stark-shifted
    splittings and the exchange term remain, on the (cbjj, nve) layout.
    """
    _check_dispersive(p, allow_nondispersive)
    eta = p.eta()
    shift_c = p.g_tc**2 / p.delta_tc
    shift_d = p.g_td**2 / p.delta_td

    if vacuum_reduced:
        layout = reduced_layout()
        q = qubit_ops()
        sz_c = embed(q["sigma_z"], 0, layout)
        sz_d = embed(q["sigma_z"], 1, layout)
        sp_c = embed(q["sigma_plus"], 0, layout)
        sp_d = embed(q["sigma_plus"], 1, layout)
        exchange = sp_d @ sp_c.dag()
        return ((0.5 * p.omega_10 + 0.5 * shift_c) * sz_c
                + (0.5 * p.omega_eg + 0.5 * shift_d) * sz_d
                + eta * (exchange + exchange.dag()))

    layout, a, sp_c, sp_d, q = _chain_ops(p.n_max)
    sz_c = embed(q["sigma_z"], layout.slot("cbjj"), layout)
    sz_d = embed(q["sigma_z"], layout.slot("nve"), layout)
    n_ph = a.dag() @ a
    exchange = sp_d @ sp_c.dag()
    return (p.omega_c * n_ph + 0.5 * p.omega_10 * sz_c
            + 0.5 * p.omega_eg * sz_d
            + shift_c * (sp_c @ sp_c.dag() + sz_c @ n_ph)
            + shift_d * (sp_d @ sp_d.dag() + sz_d @ n_ph)
            + eta * (exchange + exchange.dag()))


def h_exchange(eta: float) -> Operator:
    """Bare excitation-exchange Hamiltonian on the (cbjj, nve) layout."""
    layout = reduced_layout()
    q = qubit_ops()
    sp_c = embed(q["sigma_plus"], 0, layout)
    sp_d = embed(q["sigma_plus"], 1, layout)
    exchange = sp_d @ sp_c.dag()
    return eta * (exchange + exchange.dag())


def h_multi(etas) -> Operator:
    """Star-coupling Hamiltonian: the junction exchanges one excitation
    with each of N ensembles at its own rate."""
    etas = [float(e) for e in etas]
    layout = multi_layout(len(etas))
    q = qubit_ops()
    sm_c = embed(q["sigma_minus"], 0, layout)
    h = Operator(np.zeros((layout.dim, layout.dim)), layout)
    for i, eta_i in enumerate(etas):
        sp_i = embed(q["sigma_plus"], i + 1, layout)
        term = sp_i @ sm_c
        h = h + eta_i * (term + term.dag())
    return h


def total_excitation(layout: SpaceLayout) -> Operator:
    """Sum of excitation-number operators over all subsystems; commutes
    with every builder in this module."""
    total = Operator(np.zeros((layout.dim, layout.dim)), layout)
    for slot, d in enumerate(layout.dims):
        number = Operator(np.diag(np.arange(d, dtype=float)),
                          SpaceLayout((d,)))
        total = total + embed(number, slot, layout)
    return total


def cbjj_excited_projector(layout: SpaceLayout) -> Operator:
    """Projector onto the junction's excited level, lifted to the layout."""
    return embed(qubit_ops()["project_1"], layout.slot("cbjj"), layout)


def identity_on(layout: SpaceLayout) -> Operator:
    return identity(layout)
