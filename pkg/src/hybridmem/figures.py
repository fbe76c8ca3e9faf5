"""Figure rendering for scenario output.

Renders straight from the (columns, rows) table the CSV writer receives,
so the picture can never drift from the data on disk. Headless backend;
params-report has nothing to draw and returns None.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .config import ResolvedConfig


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _table(columns: list[str], rows: list[tuple]) -> dict[str, np.ndarray]:
    arr = {name: [] for name in columns}
    for row in rows:
        for name, value in zip(columns, row):
            arr[name].append(value)
    return {name: np.asarray(vals) for name, vals in arr.items()}


def _grid_panel(plt, cols, table, xlabel, ylabel):
    x = np.unique(table[cols[0]])
    y = np.unique(table[cols[1]])
    f = table[cols[2]].reshape(len(x), len(y))
    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    mesh = ax.pcolormesh(x, y, f.T, shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="fidelity")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    return fig


def _series_panel(plt, table, time_col, series, xlabel, ylabel):
    fig, ax = plt.subplots(figsize=(5.6, 4.0))
    for name, style, label in series:
        ax.plot(table[time_col], table[name], style, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    return fig


def render(
    cfg: ResolvedConfig, columns: list[str], rows: list[tuple],
    out_path: Path,
) -> Path | None:
    """Draw the scenario's figure next to its CSV; returns the path, or
    None when the scenario has no graphical form."""
    name = cfg.scenario
    if name == "params-report":
        return None
    plt = _pyplot()
    table = _table(columns, rows)

    if name == "fig2c":
        fig = _grid_panel(plt, columns, table, r"$\kappa/g_0$",
                          r"$\gamma/g_0$")
    elif name == "fig2d":
        fig = _grid_panel(plt, columns, table, r"$\gamma_{10}/\eta$",
                          r"$\gamma_\phi/\eta$")
    elif name == "fig3a":
        fig = _series_panel(plt, table, "g0_t", [
            ("f_delta_0", "-", r"$\delta = 0$"),
            ("f_delta_neg", ":", r"$\delta = -0.1$"),
            ("f_delta_pos", "--", r"$\delta = +0.1$"),
        ], r"$g_0 t$", "fidelity")
    elif name == "fig3b":
        fig = _series_panel(plt, table, "eta_t", [
            ("f_alpha2_half", "-", r"$|\alpha|^2 = 1/2$"),
            ("f_alpha2_third", "--", r"$|\alpha|^2 = 1/3$"),
            ("f_alpha2_twothirds", ":", r"$|\alpha|^2 = 2/3$"),
        ], r"$\eta t$", "fidelity")
    elif name == "fig4b":
        fig, ax = plt.subplots(figsize=(5.6, 4.0))
        for tag, color in (("eta50", "C0"), ("eta100", "C1"),
                           ("eta200", "C2")):
            ax.plot(table["eta_t"], table[f"f_uncond_{tag}"], "-",
                    color=color, label=rf"$\gamma=\eta/{tag[3:]}$ uncond.")
            ax.plot(table["eta_t"], table[f"f_cond_{tag}"], "--",
                    color=color, alpha=0.7,
                    label=rf"$\gamma=\eta/{tag[3:]}$ cond.")
        ax.set_xlabel(r"$\eta t$")
        ax.set_ylabel("fidelity")
        ax.legend(fontsize=7)
        ax.grid(alpha=0.3)
    elif name == "fig4c":
        fig = _series_panel(plt, table, "gamma_over_eta", [
            ("f_unconditional", "-", "unconditional"),
            ("f_conditional", "--", "conditional"),
            ("success_probability", ":", "success probability"),
        ], r"$\gamma/\eta$", "fidelity at gating time")
    elif name == "validate-dispersive":
        ratios = np.unique(table["ratio"])
        fig, axes = plt.subplots(1, len(ratios), figsize=(10.4, 4.0),
                                 sharey=True)
        axes = np.atleast_1d(axes)
        for ax, ratio in zip(axes, ratios):
            mask = table["ratio"] == ratio
            t = table["eta_t"][mask]
            ax.plot(t, table["p_cbjj_full"][mask], "-",
                    label="full chain")
            ax.plot(t, table["p_cbjj_effective"][mask], "--",
                    label="reduced model")
            ax.plot(t, table["photon"][mask], ":", label="photon")
            ax.set_title(rf"$g/\Delta = {ratio:g}$", fontsize=10)
            ax.set_xlabel(r"$\eta t$")
            ax.grid(alpha=0.3)
        axes[0].set_ylabel("population")
        axes[0].legend(fontsize=8)
    elif name == "custom":
        time_col = columns[0]
        series = [(col, "-", col) for col in columns[1:]]
        fig = _series_panel(plt, table, time_col, series, time_col,
                            "value")
    else:
        return None

    fig.tight_layout()
    fig.savefig(out_path, dpi=cfg.output["dpi"])
    plt.close(fig)
    return out_path
