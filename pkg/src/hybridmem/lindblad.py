"""Open-system evolution: master equation, RK4 stepper, exact oracle.

The master equation uses the factor-2 dissipator convention,

    drho/dt = -i[H, rho] + sum_k (rate_k / 2) * D[A_k] rho,
    D[A] rho = 2 A rho A^dag - A^dag A rho - rho A^dag A,

so kappa is the net photon loss rate and gamma_10 + Gamma_1 the net
junction relaxation rate. Two independent propagation routes are kept:
a hand-stepped fixed-dt RK4 (evolve_rk4) and a vectorized superoperator
exponential (liouvillian + evolve_exact); tests cross-check them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .hilbert import (
    DensityMatrix,
    Ket,
    Operator,
    SpaceLayout,
    annihilation,
    embed,
    qubit_ops,
)

# Hard abort thresholds during integration.
ABORT_TRACE_ERROR = 1e-6
ABORT_MIN_EIGENVALUE = -1e-6

# Hygiene levels the scenarios are expected to hold at every record.
HYGIENE_TRACE_ERROR = 1e-9
HYGIENE_HERMITICITY = 1e-9
HYGIENE_MIN_EIGENVALUE = -1e-8
HYGIENE_TOP_FOCK = 1e-10

# Stability guard: dt times the spectral bound of H, checked at setup.
DT_SPECTRAL_LIMIT = 0.05

EXACT_DIM_LIMIT = 64


class IntegrationError(RuntimeError):
    """Raised when a trajectory breaches the abort thresholds."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


@dataclass(frozen=True)
class DecoherenceRates:
    """Decay rates in model units: photon loss kappa, junction relaxation
    gamma_10, junction tunneling gamma_1, junction pure dephasing
    gamma_phi."""

    kappa: float = 0.0
    gamma_10: float = 0.0
    gamma_1: float = 0.0
    gamma_phi: float = 0.0

    def __post_init__(self):
        for name in ("kappa", "gamma_10", "gamma_1", "gamma_phi"):
            if getattr(self, name) < 0:
                raise ValueError(f"rate {name} cannot be negative")

    @classmethod
    def zero(cls) -> "DecoherenceRates":
        return cls()

    def any_nonzero(self) -> bool:
        return (self.kappa > 0 or self.gamma_10 > 0 or self.gamma_1 > 0
                or self.gamma_phi > 0)


@dataclass(frozen=True)
class CollapseChannel:
    """One dissipator term: prefactor * D[operator], prefactor = rate/2."""

    operator: Operator
    prefactor: float

    def __post_init__(self):
        if self.prefactor < 0:
            raise ValueError("channel prefactor cannot be negative")


def build_channels(
    rates: DecoherenceRates, layout: SpaceLayout
) -> list[CollapseChannel]:
    """Standard channel set on a layout: photon loss on the "tlr" slot
    when present, relaxation and dephasing on the "cbjj" slot.

    gamma_10 and gamma_1 act through the same lowering operator, so they
    enter as one channel with prefactor (gamma_10 + gamma_1)/2.
    """
    q = qubit_ops()
    channels = []
    if rates.kappa > 0:
        if "tlr" not in layout.labels:
            raise ValueError("kappa > 0 but the layout has no tlr slot")
        tlr_slot = layout.slot("tlr")
        a = embed(annihilation(layout.dims[tlr_slot]), tlr_slot, layout)
        channels.append(CollapseChannel(a, rates.kappa / 2.0))
    relax = rates.gamma_10 + rates.gamma_1
    cbjj = layout.slot("cbjj")
    if relax > 0:
        channels.append(
            CollapseChannel(embed(q["sigma_minus"], cbjj, layout), relax / 2.0)
        )
    if rates.gamma_phi > 0:
        channels.append(
            CollapseChannel(embed(q["sigma_z"], cbjj, layout),
                            rates.gamma_phi / 2.0)
        )
    return channels


def dissipator(a: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """D[A] rho = 2 A rho A^dag - A^dag A rho - rho A^dag A."""
    ad = a.conj().T
    ada = ad @ a
    return 2.0 * (a @ rho @ ad) - ada @ rho - rho @ ada


def master_rhs(
    h: Operator, channels: Sequence[CollapseChannel], rho: np.ndarray
) -> np.ndarray:
    """Right-hand side of the master equation for a raw state matrix."""
    hm = h.matrix
    out = -1j * (hm @ rho - rho @ hm)
    for ch in channels:
        out = out + ch.prefactor * dissipator(ch.operator.matrix, rho)
    return out


@dataclass(frozen=True)
class EvolutionConfig:
    """Fixed-step integration plan.

    t_final must be an integer number of steps and the step count an
    integer number of records. Use plan() to build one from a target dt.
    """

    dt: float
    t_final: float
    record_stride: int = 1
    renorm: str = "off"

    def __post_init__(self):
        if self.dt <= 0 or self.t_final <= 0:
            raise ValueError("dt and t_final must be positive")
        if self.record_stride < 1:
            raise ValueError("record stride must be >= 1")
        if self.renorm not in ("off", "records"):
            raise ValueError(f"unknown renorm policy {self.renorm!r}")
        n = self.t_final / self.dt
        if abs(n - round(n)) > 1e-6:
            raise ValueError("t_final must be an integer number of steps")
        if round(n) % self.record_stride != 0:
            raise ValueError("step count must divide into whole records")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    @classmethod
    def plan(
        cls,
        t_final: float,
        n_records: int,
        dt_target: float = 1e-3,
        renorm: str = "off",
    ) -> "EvolutionConfig":
        """Choose dt <= dt_target so records land on exact multiples of
        t_final / n_records."""
        if t_final <= 0 or n_records < 1 or dt_target <= 0:
            raise ValueError("need positive t_final, records and dt target")
        spacing = t_final / n_records
        substeps = max(1, int(np.ceil(spacing / dt_target - 1e-12)))
        return cls(dt=spacing / substeps, t_final=t_final,
                   record_stride=substeps, renorm=renorm)


@dataclass
class Trajectory:
    """Recorded snapshots plus per-record diagnostics.

    Snapshots are stored raw; state() re-validates through DensityMatrix.
    Diagnostics arrays: trace_error, hermiticity_error, min_eigenvalue,
    and top_fock (population of the highest photon level, zeros when the
    layout has no photon mode).
    """

    times: np.ndarray
    layout: SpaceLayout
    raw_states: list = field(repr=False)
    diagnostics: dict = field(repr=False)

    def state(self, i: int) -> DensityMatrix:
        return DensityMatrix(self.raw_states[i], self.layout)

    @property
    def final_state(self) -> DensityMatrix:
        return self.state(len(self.raw_states) - 1)

    def expectation(self, op: Operator) -> np.ndarray:
        if op.layout.dims != self.layout.dims:
            raise ValueError("operator layout does not match trajectory")
        return np.array([np.real(np.trace(op.matrix @ r))
                         for r in self.raw_states])

    def fidelity_series(self, target: Ket) -> np.ndarray:
        if target.layout.dims != self.layout.dims:
            raise ValueError("target layout does not match trajectory")
        v = target.amplitudes
        return np.array([np.real(v.conj() @ r @ v) for r in self.raw_states])

    def max_diagnostics(self) -> dict:
        d = self.diagnostics
        return {
            "trace_error": float(np.max(d["trace_error"])),
            "hermiticity_error": float(np.max(d["hermiticity_error"])),
            "min_eigenvalue": float(np.min(d["min_eigenvalue"])),
            "top_fock": float(np.max(d["top_fock"])),
        }


def _spectral_bound(h: Operator) -> float:
    # Hermitian, so the 2-norm is the largest |eigenvalue|.
    return float(np.linalg.norm(h.matrix, 2))


def _top_fock_diagonal(layout: SpaceLayout) -> np.ndarray | None:
    if "tlr" not in layout.labels:
        return None
    slot = layout.slot("tlr")
    top = layout.dims[slot] - 1
    stride = int(np.prod(layout.dims[slot + 1:], dtype=int))
    occ = (np.arange(layout.dim) // stride) % layout.dims[slot]
    return (occ == top).astype(float)


def evolve_rk4(
    rho0: DensityMatrix,
    h: Operator,
    channels: Sequence[CollapseChannel],
    config: EvolutionConfig,
) -> Trajectory:
    """Integrate the master equation with the classic fixed-step RK4.

    Diagnostics are evaluated at every record; the run aborts with
    IntegrationError when the trace error exceeds 1e-6 or an eigenvalue
    drops below -1e-6.
    """
    if h.layout.dims != rho0.layout.dims:
        raise ValueError("Hamiltonian layout does not match the state")
    bound = _spectral_bound(h)
    if config.dt * bound > DT_SPECTRAL_LIMIT:
        raise ValueError(
            f"dt * |H| = {config.dt * bound:.3g} exceeds "
            f"{DT_SPECTRAL_LIMIT}; reduce dt"
        )

    hm = h.matrix
    ops = [(ch.prefactor, ch.operator.matrix,
            ch.operator.matrix.conj().T,
            ch.operator.matrix.conj().T @ ch.operator.matrix)
           for ch in channels]

    def rhs(r):
        out = -1j * (hm @ r - r @ hm)
        for pref, a, ad, ada in ops:
            out = out + pref * (2.0 * (a @ r @ ad) - ada @ r - r @ ada)
        return out

    top_diag = _top_fock_diagonal(rho0.layout)
    rho = np.array(rho0.matrix, dtype=complex)
    dt = config.dt

    times = [0.0]
    states = [rho.copy()]
    diag = {k: [] for k in ("trace_error", "hermiticity_error",
                            "min_eigenvalue", "top_fock")}

    def record(r, t):
        if not np.all(np.isfinite(r)):
            raise IntegrationError(
                f"non-finite density matrix at t = {t:.6g}", t)
        tr_err = abs(np.trace(r) - 1.0)
        herm = float(np.max(np.abs(r - r.conj().T)))
        min_eig = float(np.linalg.eigvalsh(0.5 * (r + r.conj().T)).min())
        top = float(np.real(np.sum(top_diag * np.diag(r)))) if top_diag is not None else 0.0
        diag["trace_error"].append(tr_err)
        diag["hermiticity_error"].append(herm)
        diag["min_eigenvalue"].append(min_eig)
        diag["top_fock"].append(top)
        if tr_err > ABORT_TRACE_ERROR:
            raise IntegrationError(
                f"trace error {tr_err:.3e} at t = {t:.6g}", t)
        if min_eig < ABORT_MIN_EIGENVALUE:
            raise IntegrationError(
                f"eigenvalue {min_eig:.3e} at t = {t:.6g}", t)

    record(rho, 0.0)
    # divergence is detected and reported at the records; the numpy
    # overflow warnings on the way there are redundant noise
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, config.n_steps + 1):
            k1 = rhs(rho)
            k2 = rhs(rho + 0.5 * dt * k1)
            k3 = rhs(rho + 0.5 * dt * k2)
            k4 = rhs(rho + dt * k3)
            rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if step % config.record_stride == 0:
                t = step * dt
                if config.renorm == "records":
                    rho = rho / np.real(np.trace(rho))
                record(rho, t)
                times.append(t)
                states.append(rho.copy())

    return Trajectory(
        times=np.array(times), layout=rho0.layout, raw_states=states,
        diagnostics={k: np.array(v) for k, v in diag.items()},
    )


def liouvillian(
    h: Operator, channels: Sequence[CollapseChannel]
) -> np.ndarray:
    """Column-stacking superoperator L with vec(drho/dt) = L vec(rho).

    vec() stacks columns (Fortran order), so vec(A rho B) =
    (B^T kron A) vec(rho). Guarded to dimension <= 64.
    """
    d = h.dim
    if d > EXACT_DIM_LIMIT:
        raise ValueError(
            f"dimension {d} exceeds the exact-path limit {EXACT_DIM_LIMIT}"
        )
    eye = np.eye(d)
    hm = h.matrix
    lv = -1j * (np.kron(eye, hm) - np.kron(hm.T, eye))
    for ch in channels:
        a = ch.operator.matrix
        ada = a.conj().T @ a
        lv = lv + ch.prefactor * (
            2.0 * np.kron(a.conj(), a)
            - np.kron(eye, ada) - np.kron(ada.T, eye)
        )
    return lv


def evolve_exact(
    rho0: DensityMatrix,
    h: Operator,
    channels: Sequence[CollapseChannel],
    t: float,
) -> DensityMatrix:
    """Propagate to time t through expm of the superoperator.

    Uses scaling-and-squaring, which has no defective-matrix failure
    mode. Independent of evolve_rk4 by construction.
    """
    if t < 0:
        raise ValueError("time must be nonnegative")
    if h.layout.dims != rho0.layout.dims:
        raise ValueError("Hamiltonian layout does not match the state")
    lv = liouvillian(h, channels)
    vec = rho0.matrix.flatten(order="F")
    out = scipy.linalg.expm(lv * t) @ vec
    d = rho0.dim
    return DensityMatrix(out.reshape((d, d), order="F"), rho0.layout)


def hygiene_report(traj: Trajectory) -> dict:
    """Max diagnostics of a trajectory against the hygiene thresholds."""
    m = traj.max_diagnostics()
    m["trace_ok"] = m["trace_error"] <= HYGIENE_TRACE_ERROR
    m["hermiticity_ok"] = m["hermiticity_error"] <= HYGIENE_HERMITICITY
    m["eigenvalue_ok"] = m["min_eigenvalue"] >= HYGIENE_MIN_EIGENVALUE
    m["top_fock_ok"] = m["top_fock"] <= HYGIENE_TOP_FOCK
    m["all_ok"] = (m["trace_ok"] and m["hermiticity_ok"]
                   and m["eigenvalue_ok"] and m["top_fock_ok"])
    return m
