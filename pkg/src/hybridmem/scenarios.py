"""Scenario runners: deterministic CSV artifacts for each study.

Grid scenarios (fig2c, fig2d, fig4c) evaluate one point per cell through
the exact superoperator route and fan cells out to a thread pool; series
scenarios (fig3a, fig3b, fig4b, custom) integrate full trajectories with
the RK4 route. Rows are always emitted in grid/time order, so output is
byte-identical for any worker count. Sweep coordinates come first in
every row.
"""

from __future__ import annotations

import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, device
from .config import ResolvedConfig
from .lindblad import DecoherenceRates, IntegrationError
from .protocols import (
    TransferSpec,
    WStateSpec,
    di_transfer,
    dispersive_point_params,
    protocol_times,
    ri_transfer,
    transfer_fidelity_at,
    validate_dispersive,
    w_state_at,
    w_state_prepare,
)

TWO_PI = 2.0 * np.pi

# Cells in any sweep; keeps accidental mega-grids out of a desk run.
MAX_CELLS = 10_000


@dataclass(frozen=True)
class Axis:
    """One linearly spaced sweep axis."""

    name: str
    start: float
    stop: float
    points: int

    def __post_init__(self):
        if self.points < 2:
            raise ValueError("an axis needs at least 2 points")
        if not self.stop > self.start:
            raise ValueError("axis stop must exceed start")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class SweepGrid:
    """Cartesian grid over axes, flattened row-major (last axis fastest)."""

    axes: tuple[Axis, ...]

    def __post_init__(self):
        if not self.axes:
            raise ValueError("grid needs at least one axis")
        if self.n_cells > MAX_CELLS:
            raise ValueError(
                f"{self.n_cells} cells exceed the desk-scale guard "
                f"{MAX_CELLS}"
            )

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(ax.points for ax in self.axes)

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.shape))

    def cells(self) -> list[dict]:
        """Flat list of {axis name: value} dicts in row-major order."""
        grids = np.meshgrid(*[ax.values() for ax in self.axes],
                            indexing="ij")
        flat = [g.ravel() for g in grids]
        return [
            {ax.name: float(flat[i][j]) for i, ax in enumerate(self.axes)}
            for j in range(self.n_cells)
        ]


@dataclass
class ScenarioData:
    """What a builder hands back before anything touches disk."""

    columns: list[str]
    rows: list[tuple]
    reports: list[tuple[str, dict | None]] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)
    extra_meta: dict = field(default_factory=dict)


@dataclass
class RunResult:
    scenario: str
    csv_path: Path
    meta_path: Path
    figure_path: Path | None
    ok: bool
    failures: list[str]
    wall_time_s: float


def _map_cells(fn, items, threads: int) -> list:
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _payload(alpha_sq: float) -> tuple[float, float]:
    return float(np.sqrt(alpha_sq)), float(np.sqrt(1.0 - alpha_sq))


def _window(cfg: ResolvedConfig, t_protocol: float,
            reference: float = 1.0) -> float:
    """Series end time in model units. sweep.t_max is dimensionless
    (reference rate times time), t_max_factor multiplies the protocol
    time."""
    t_max = cfg.sweep["t_max"]
    return float(t_max) / reference if t_max is not None else \
        cfg.sweep["t_max_factor"] * t_protocol


# --- grid scenarios --------------------------------------------------------

def _build_fig2c(cfg: ResolvedConfig, threads: int) -> ScenarioData:
    """Transfer fidelity at the resonant protocol time over the photon-loss
    and junction-decay rate plane (junction decay is the one-knob set
    gamma_10 = gamma_1 = gamma_phi)."""
    m, s = cfg.model, cfg.sweep
    alpha, beta = _payload(m["alpha_sq"])
    g0 = m["g0"]
    grid = SweepGrid((
        Axis("kappa_over_g0", 0.0, s["rate_max"], s["points"]),
        Axis("gamma_over_g0", 0.0, s["rate_max"], s["points"]),
    ))

    def cell(point: dict):
        kap = point["kappa_over_g0"] * g0
        gam = point["gamma_over_g0"] * g0
        label = (f"kappa_over_g0={point['kappa_over_g0']:.6g},"
                 f"gamma_over_g0={point['gamma_over_g0']:.6g}")
        spec = TransferSpec(
            alpha=alpha, beta=beta, mode="ri", k=m["k"], g0=g0,
            n_max=m["n_max"], raw_target=m["raw_target"],
            rates=DecoherenceRates(kappa=kap, gamma_10=gam, gamma_1=gam,
                                   gamma_phi=gam),
        )
        try:
            fid, diag = transfer_fidelity_at(spec)
            return point, fid, diag, None
        except (IntegrationError, ValueError) as exc:
            return point, float("nan"), None, f"{label}: {exc}"

    results = _map_cells(cell, grid.cells(), threads)
    data = ScenarioData(
        columns=["kappa_over_g0", "gamma_over_g0", "fidelity"], rows=[])
    for point, fid, diag, err in results:
        data.rows.append((point["kappa_over_g0"], point["gamma_over_g0"],
                          fid))
        label = (f"kappa_over_g0={point['kappa_over_g0']:.6g},"
                 f"gamma_over_g0={point['gamma_over_g0']:.6g}")
        data.reports.append((label, diag))
        if err:
            data.failures.append(err)
    data.extra_meta["path"] = "exact"
    data.extra_meta["protocol_time"] = protocol_times("ri", m["k"], g0=g0)
    return data


def _build_fig2d(cfg: ResolvedConfig, threads: int) -> ScenarioData:
    """Dispersive-transfer fidelity at the protocol time over the junction
    relaxation (gamma_10 = gamma_1 jointly) and dephasing plane."""
    m, s = cfg.model, cfg.sweep
    alpha, beta = _payload(m["alpha_sq"])
    eta = m["eta"]
    grid = SweepGrid((
        Axis("gamma_10_over_eta", 0.0, s["rate_max"], s["points"]),
        Axis("gamma_phi_over_eta", 0.0, s["rate_max"], s["points"]),
    ))

    def cell(point: dict):
        g10 = point["gamma_10_over_eta"] * eta
        gphi = point["gamma_phi_over_eta"] * eta
        label = (f"gamma_10_over_eta={point['gamma_10_over_eta']:.6g},"
                 f"gamma_phi_over_eta={point['gamma_phi_over_eta']:.6g}")
        spec = TransferSpec(
            alpha=alpha, beta=beta, mode="di", k=m["k"], eta=eta,
            raw_target=m["raw_target"],
            rates=DecoherenceRates(gamma_10=g10, gamma_1=g10,
                                   gamma_phi=gphi),
        )
        try:
            fid, diag = transfer_fidelity_at(spec)
            return point, fid, diag, None
        except (IntegrationError, ValueError) as exc:
            return point, float("nan"), None, f"{label}: {exc}"

    results = _map_cells(cell, grid.cells(), threads)
    data = ScenarioData(
        columns=["gamma_10_over_eta", "gamma_phi_over_eta", "fidelity"],
        rows=[])
    for point, fid, diag, err in results:
        data.rows.append((point["gamma_10_over_eta"],
                          point["gamma_phi_over_eta"], fid))
        label = (f"gamma_10_over_eta={point['gamma_10_over_eta']:.6g},"
                 f"gamma_phi_over_eta={point['gamma_phi_over_eta']:.6g}")
        data.reports.append((label, diag))
        if err:
            data.failures.append(err)
    data.extra_meta["path"] = "exact"
    data.extra_meta["protocol_time"] = protocol_times("di", m["k"], eta=eta)
    return data


def _build_fig4c(cfg: ResolvedConfig, threads: int) -> ScenarioData:
    """Shared-excitation fidelities at the gating time versus the one-knob
    junction rate gamma (= gamma_10 = gamma_1 = gamma_phi)."""
    m, s = cfg.model, cfg.sweep
    eta, n = m["eta"], m["n_ensembles"]
    grid = SweepGrid((
        Axis("gamma_over_eta", 0.0, s["rate_max"], s["points"]),
    ))

    def cell(point: dict):
        gam = point["gamma_over_eta"] * eta
        label = f"gamma_over_eta={point['gamma_over_eta']:.6g}"
        spec = WStateSpec(
            n_ensembles=n, eta=eta, k=m["k"],
            rates=DecoherenceRates(gamma_10=gam, gamma_1=gam,
                                   gamma_phi=gam),
        )
        try:
            fu, fc, p, diag = w_state_at(spec)
            return point, (fu, fc, p), diag, None
        except (IntegrationError, ValueError) as exc:
            nan = float("nan")
            return point, (nan, nan, nan), None, f"{label}: {exc}"

    results = _map_cells(cell, grid.cells(), threads)
    data = ScenarioData(
        columns=["gamma_over_eta", "f_unconditional", "f_conditional",
                 "success_probability"], rows=[])
    for point, vals, diag, err in results:
        data.rows.append((point["gamma_over_eta"],) + vals)
        data.reports.append((f"gamma_over_eta="
                             f"{point['gamma_over_eta']:.6g}", diag))
        if err:
            data.failures.append(err)
    data.extra_meta["path"] = "exact"
    data.extra_meta["protocol_time"] = protocol_times(
        "w", m["k"], eta=eta, n_ensembles=n)
    return data


# --- series scenarios ------------------------------------------------------

def _labeled_run(label: str, fn):
    """Run a trajectory-producing callable, tagging failures by label."""
    try:
        return fn()
    except IntegrationError as exc:
        raise IntegrationError(f"{label}: {exc}", exc.time) from None


def _build_fig3a(cfg: ResolvedConfig, threads: int) -> ScenarioData:
    """Resonant-transfer fidelity traces for three mismatch settings."""
    m = cfg.model
    alpha, beta = _payload(m["alpha_sq"])
    g0 = m["g0"]
    t_p = protocol_times("ri", m["k"], g0=g0)
    t_final = _window(cfg, t_p, reference=g0)
    deltas = ((0.0, "f_delta_0"), (-0.1, "f_delta_neg"),
              (0.1, "f_delta_pos"))

    def run(item):
        delta, column = item
        spec = TransferSpec(alpha=alpha, beta=beta, mode="ri", delta=delta,
                            rates=cfg.rates, k=m["k"], g0=g0,
                            n_max=m["n_max"], raw_target=m["raw_target"])
        return _labeled_run(column, lambda: ri_transfer(
            spec, t_final=t_final, n_records=cfg.sweep["time_points"],
            dt_target=m["dt_target"] / g0, renorm=m["renorm"]))

    runs = _map_cells(run, deltas, threads)
    times = runs[0].times
    data = ScenarioData(
        columns=["g0_t"] + [col for _, col in deltas],
        rows=[tuple([g0 * t] + [r.fidelities[i] for r in runs])
              for i, t in enumerate(times)],
    )
    for (delta, column), res in zip(deltas, runs):
        data.reports.append((column, res.diagnostics))
        data.extra_meta[f"delta.{column}"] = delta
        data.extra_meta[f"f_at_protocol_time.{column}"] = \
            res.f_at_protocol_time
        data.extra_meta[f"peak_fidelity.{column}"] = res.peak_fidelity
        data.extra_meta[f"peak_time.{column}"] = res.peak_time
    data.extra_meta["path"] = "rk4"
    data.extra_meta["dt"] = runs[0].diagnostics["dt"]
    data.extra_meta["protocol_time"] = t_p
    return data


def _build_fig3b(cfg: ResolvedConfig, threads: int) -> ScenarioData:
    """Dispersive-transfer fidelity traces for three payload weights."""
    m = cfg.model
    eta = m["eta"]
    t_p = protocol_times("di", m["k"], eta=eta)
    t_final = _window(cfg, t_p, reference=eta)
    weights = ((1.0 / 2.0, "f_alpha2_half"), (1.0 / 3.0, "f_alpha2_third"),
               (2.0 / 3.0, "f_alpha2_twothirds"))

    def run(item):
        alpha_sq, column = item
        alpha, beta = _payload(alpha_sq)
        spec = TransferSpec(alpha=alpha, beta=beta, mode="di",
                            rates=cfg.rates, k=m["k"], eta=eta,
                            raw_target=m["raw_target"])
        return _labeled_run(column, lambda: di_transfer(
            spec, t_final=t_final, n_records=cfg.sweep["time_points"],
            dt_target=m["dt_target"] / eta, renorm=m["renorm"]))

    runs = _map_cells(run, weights, threads)
    times = runs[0].times
    data = ScenarioData(
        columns=["eta_t"] + [col for _, col in weights],
        rows=[tuple([eta * t] + [r.fidelities[i] for r in runs])
              for i, t in enumerate(times)],
    )
    for (alpha_sq, column), res in zip(weights, runs):
        data.reports.append((column, res.diagnostics))
        data.extra_meta[f"alpha_sq.{column}"] = alpha_sq
        data.extra_meta[f"f_at_protocol_time.{column}"] = \
            res.f_at_protocol_time
        data.extra_meta[f"peak_fidelity.{column}"] = res.peak_fidelity
        data.extra_meta[f"peak_time.{column}"] = res.peak_time
    data.extra_meta["path"] = "rk4"
    data.extra_meta["dt"] = runs[0].diagnostics["dt"]
    data.extra_meta["protocol_time"] = t_p
    return data


def _build_fig4b(cfg: ResolvedConfig, threads: int) -> ScenarioData:
    """Shared-excitation traces for the one-knob junction rate at
    eta/50, eta/100, eta/200."""
    m = cfg.model
    eta, n = m["eta"], m["n_ensembles"]
    t_w = protocol_times("w", m["k"], eta=eta, n_ensembles=n)
    t_final = _window(cfg, t_w, reference=eta)
    knobs = ((eta / 50.0, "eta50"), (eta / 100.0, "eta100"),
             (eta / 200.0, "eta200"))

    def run(item):
        gam, tag = item
        spec = WStateSpec(
            n_ensembles=n, eta=eta, k=m["k"],
            rates=DecoherenceRates(gamma_10=gam, gamma_1=gam,
                                   gamma_phi=gam),
        )
        result, _ = _labeled_run(f"gamma_{tag}", lambda: w_state_prepare(
            spec, t_final=t_final, n_records=cfg.sweep["time_points"],
            dt_target=m["dt_target"] / eta, renorm=m["renorm"]))
        return result

    runs = _map_cells(run, knobs, threads)
    times = runs[0].times
    columns = ["eta_t"]
    for _, tag in knobs:
        columns += [f"f_uncond_{tag}", f"f_cond_{tag}", f"p_{tag}"]
    rows = []
    for i, t in enumerate(times):
        row = [eta * t]
        for res in runs:
            row += [res.f_unconditional[i], res.f_conditional[i],
                    res.success_probability[i]]
        rows.append(tuple(row))
    data = ScenarioData(columns=columns, rows=rows)
    for (gam, tag), res in zip(knobs, runs):
        data.reports.append((f"gamma_{tag}", res.diagnostics))
        data.extra_meta[f"gamma.{tag}"] = gam
        data.extra_meta[f"f_uncond_at_gate.{tag}"] = \
            res.f_unconditional_at_gate
        data.extra_meta[f"f_cond_at_gate.{tag}"] = res.f_conditional_at_gate
        data.extra_meta[f"p_at_gate.{tag}"] = res.p_at_gate
    data.extra_meta["path"] = "rk4"
    data.extra_meta["dt"] = runs[0].diagnostics["dt"]
    data.extra_meta["protocol_time"] = t_w
    return data


def _build_custom(cfg: ResolvedConfig, threads: int) -> ScenarioData:
    """One run of whatever [model] describes, traced over time."""
    m = cfg.model
    mode = m["mode"]
    if mode == "w":
        eta, n = m["eta"], m["n_ensembles"]
        t_p = protocol_times("w", m["k"], eta=eta, n_ensembles=n)
        spec = WStateSpec(n_ensembles=n, eta=eta, rates=cfg.rates,
                          k=m["k"])
        result, p = _labeled_run("custom", lambda: w_state_prepare(
            spec, t_final=_window(cfg, t_p, reference=eta),
            n_records=cfg.sweep["time_points"],
            dt_target=m["dt_target"] / eta, renorm=m["renorm"]))
        rows = [
            (eta * t, result.f_unconditional[i], result.f_conditional[i],
             result.success_probability[i])
            for i, t in enumerate(result.times)
        ]
        data = ScenarioData(
            columns=["eta_t", "f_unconditional", "f_conditional",
                     "success_probability"],
            rows=rows, reports=[("custom", result.diagnostics)],
        )
        data.extra_meta.update({
            "path": "rk4", "dt": result.diagnostics["dt"],
            "protocol_time": t_p,
            "f_uncond_at_gate": result.f_unconditional_at_gate,
            "f_cond_at_gate": result.f_conditional_at_gate,
            "p_at_gate": p,
        })
        return data

    alpha, beta = _payload(m["alpha_sq"])
    spec = TransferSpec(alpha=alpha, beta=beta, mode=mode,
                        delta=m["delta"], rates=cfg.rates, k=m["k"],
                        g0=m["g0"], eta=m["eta"], n_max=m["n_max"],
                        raw_target=m["raw_target"],
                        dispersive_ratio=m["dispersive_ratio"])
    if mode == "ri":
        reference, time_col, runner = m["g0"], "g0_t", ri_transfer
    else:
        reference, time_col, runner = m["eta"], "eta_t", di_transfer
    t_p = protocol_times(mode, m["k"], g0=m["g0"], eta=m["eta"])
    result = _labeled_run("custom", lambda: runner(
        spec, t_final=_window(cfg, t_p, reference=reference),
        n_records=cfg.sweep["time_points"],
        dt_target=m["dt_target"] / reference, renorm=m["renorm"]))
    data = ScenarioData(
        columns=[time_col, "fidelity"],
        rows=[(reference * t, result.fidelities[i])
              for i, t in enumerate(result.times)],
        reports=[("custom", result.diagnostics)],
    )
    data.extra_meta.update({
        "path": "rk4", "dt": result.diagnostics["dt"],
        "protocol_time": t_p,
        "f_at_protocol_time": result.f_at_protocol_time,
        "peak_fidelity": result.peak_fidelity,
        "peak_time": result.peak_time,
    })
    return data


# --- report scenarios ------------------------------------------------------

def _build_params_report(cfg: ResolvedConfig, threads: int) -> ScenarioData:
    """Derived operating-point survey for the two preset device points."""
    rows: list[tuple] = []

    def add(point: str, quantity: str, value: float, unit: str):
        rows.append((point, quantity, float(value), unit))

    def add_freq(point: str, name: str, omega: float):
        add(point, name, omega, "rad/s")
        add(point, f"{name}_over_2pi", omega / TWO_PI, "Hz")

    cbjj, tlr, nve = device.resonant_point()
    d = device.derive_resonant(cbjj, tlr, nve)
    add_freq("ri", "omega_p", d.omega_p)
    add_freq("ri", "omega_10", d.omega_10)
    add_freq("ri", "omega_21", d.omega_21)
    add_freq("ri", "xi", d.xi)
    add_freq("ri", "omega_c", d.omega_c)
    add("ri", "delta_0", d.delta_0, "rad")
    add_freq("ri", "g_tc", d.g_tc)
    add_freq("ri", "g_td", d.g_td)
    add("ri", "leakage", d.leakage, "1")
    add("ri", "t_protocol",
        protocol_times("ri", cfg.model["k"], g0=d.g_tc), "s")

    point = device.dispersive_point()
    dd = device.derive_dispersive(**point)
    add_freq("di", "omega_p", dd.omega_p)
    add_freq("di", "omega_10", dd.omega_10)
    add_freq("di", "omega_21", dd.omega_21)
    add_freq("di", "xi", dd.xi)
    add_freq("di", "omega_c", dd.omega_c)
    add_freq("di", "g_tc", dd.g_tc)
    add_freq("di", "g_td", dd.g_td)
    add_freq("di", "eta", dd.eta)
    add("di", "leakage", dd.leakage, "1")
    add("di", "t_protocol",
        protocol_times("di", cfg.model["k"], eta=dd.eta), "s")
    add("di", "t_shared_excitation",
        protocol_times("w", cfg.model["k"], eta=dd.eta,
                       n_ensembles=cfg.model["n_ensembles"]), "s")

    data = ScenarioData(columns=["point", "quantity", "value", "unit"],
                        rows=rows)
    data.extra_meta["path"] = "arithmetic"
    return data


def _build_validate_dispersive(
    cfg: ResolvedConfig, threads: int
) -> ScenarioData:
    """Reduced-model accuracy report at the conservative and the quoted
    operating ratio."""
    series = cfg.sweep["time_points"]
    fine = (series - 1) * 200 + 1
    ratios = (0.04, 0.2)
    data = ScenarioData(
        columns=["ratio", "eta_t", "p_cbjj_full", "p_cbjj_effective",
                 "photon"], rows=[])
    for ratio in ratios:
        rep = validate_dispersive(
            dispersive_point_params(ratio, n_max=cfg.model["n_max"]),
            fine_samples=fine, series_samples=series)
        for i, t in enumerate(rep.times):
            data.rows.append((ratio, t, rep.p_cbjj_full[i],
                              rep.p_cbjj_effective[i], rep.photon[i]))
        tag = f"{ratio:g}"
        data.extra_meta[f"max_deviation.ratio_{tag}"] = rep.max_deviation
        data.extra_meta[f"max_photon.ratio_{tag}"] = rep.max_photon
        data.extra_meta[f"photon_scale.ratio_{tag}"] = \
            rep.transient_photon_scale
        data.extra_meta[f"duration.ratio_{tag}"] = rep.duration
    data.extra_meta["path"] = "eigh"
    return data


_BUILDERS = {
    "fig2c": _build_fig2c,
    "fig2d": _build_fig2d,
    "fig3a": _build_fig3a,
    "fig3b": _build_fig3b,
    "fig4b": _build_fig4b,
    "fig4c": _build_fig4c,
    "params-report": _build_params_report,
    "validate-dispersive": _build_validate_dispersive,
    "custom": _build_custom,
}


# --- artifact writing ------------------------------------------------------

def format_cell(value) -> str:
    """CSV cell text: strings pass through, numbers get 12 significant
    digits."""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.12g" % float(value)


def write_csv(path: Path, columns: list[str], rows: list[tuple]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(format_cell(v) for v in row) + "\n")


def _revision() -> str:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            cwd=Path(__file__).resolve().parent, capture_output=True,
            text=True, timeout=5,
        )
        rev = out.stdout.strip()
        return f"g{rev}" if out.returncode == 0 and rev else "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


def _collect_failures(data: ScenarioData) -> list[str]:
    failures = list(data.failures)
    for label, diag in data.reports:
        if diag is None:
            continue   # already covered by an explicit failure entry
        if not diag.get("all_ok", True):
            bad = [k for k in ("trace_ok", "hermiticity_ok",
                               "eigenvalue_ok", "top_fock_ok")
                   if not diag.get(k, True)]
            failures.append(f"{label}: diagnostics breach "
                            f"({', '.join(bad)})")
    return failures


def _worst_diagnostics(data: ScenarioData) -> dict:
    worst: dict = {}
    for _, diag in data.reports:
        if diag is None:
            continue
        for key, take in (("trace_error", max), ("hermiticity_error", max),
                          ("top_fock", max), ("min_eigenvalue", min)):
            if key in diag:
                worst[key] = (diag[key] if key not in worst
                              else take(worst[key], diag[key]))
    return worst


def write_metadata(
    path: Path, cfg: ResolvedConfig, data: ScenarioData,
    wall_time_s: float, ok: bool,
) -> None:
    lines = [
        f"scenario = {cfg.scenario}",
        f"version = {__version__}",
        f"revision = {_revision()}",
        f"config_sha = {cfg.content_hash()}",
        f"wall_time_s = {wall_time_s:.3f}",
        f"rows = {len(data.rows)}",
        f"hygiene_ok = {'true' if ok else 'false'}",
    ]
    for key, value in cfg.flat().items():
        lines.append(f"cfg.{key} = {format_cell(value) if value is not None else ''}")
    for key in sorted(data.extra_meta):
        value = data.extra_meta[key]
        lines.append(f"{key} = "
                     f"{format_cell(value) if value is not None else ''}")
    for key, value in sorted(_worst_diagnostics(data).items()):
        lines.append(f"worst.{key} = {format_cell(value)}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def run_scenario(
    cfg: ResolvedConfig, out_dir: str | Path, threads: int = 1
) -> RunResult:
    """Build a scenario's data and write CSV, metadata, and (unless
    disabled) the rendered figure into out_dir."""
    if threads < 1:
        raise ValueError("threads must be >= 1")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    data = _BUILDERS[cfg.scenario](cfg, threads)
    wall = time.perf_counter() - started

    failures = _collect_failures(data)
    ok = not failures
    prefix = cfg.output["prefix"]
    csv_path = out / f"{prefix}.csv"
    meta_path = out / f"{prefix}.meta"
    write_csv(csv_path, data.columns, data.rows)
    write_metadata(meta_path, cfg, data, wall, ok)

    figure_path = None
    if cfg.output["figures"]:
        from . import figures
        figure_path = figures.render(cfg, data.columns, data.rows,
                                     out / f"{prefix}.png")

    return RunResult(scenario=cfg.scenario, csv_path=csv_path,
                     meta_path=meta_path, figure_path=figure_path,
                     ok=ok, failures=failures, wall_time_s=wall)
