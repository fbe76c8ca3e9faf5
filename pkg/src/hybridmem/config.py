"""Scenario configuration: INI files layered over documented defaults.

Each scenario ships with a complete default parameter set; a config file
only overrides. Sections are fixed (model, rates, sweep, output), keys
are validated against a registry, and anything unrecognized is a hard
error carrying a nearest-key suggestion. `print_defaults` emits the
effective defaults for a scenario as a parseable config.
"""

from __future__ import annotations

import configparser
import difflib
import hashlib
from dataclasses import dataclass

from .lindblad import DecoherenceRates

SCENARIO_NAMES = (
    "fig2c", "fig2d", "fig3a", "fig3b", "fig4b", "fig4c",
    "params-report", "validate-dispersive", "custom",
)

TRANSFER_MODES = ("ri", "di", "di-full", "w")
RENORM_POLICIES = ("off", "records")

_BOOL_STATES = {
    "1": True, "yes": True, "true": True, "on": True,
    "0": False, "no": False, "false": False, "off": False,
}


class ConfigError(Exception):
    """Anything wrong with scenario selection or configuration input."""


def _suggest(word: str, candidates) -> str:
    close = difflib.get_close_matches(word, list(candidates), n=1,
                                      cutoff=0.4)
    return f" (did you mean {close[0]!r}?)" if close else ""


# --- typed key registry ----------------------------------------------------
# kind: float / optfloat / int / bool / str; check: predicate on the value.

def _positive(v) -> bool:
    return v > 0


def _nonnegative(v) -> bool:
    return v >= 0


def _unit_interval(v) -> bool:
    return 0.0 <= v <= 1.0


_KEYS: dict[str, dict[str, tuple]] = {
    "model": {
        "mode": ("str", lambda v: v in TRANSFER_MODES,
                 f"one of {TRANSFER_MODES}"),
        "alpha_sq": ("float", _unit_interval, "in [0, 1]"),
        "delta": ("float", lambda v: -0.5 <= v <= 0.5, "in [-0.5, 0.5]"),
        "g0": ("float", _positive, "> 0"),
        "eta": ("float", _positive, "> 0"),
        "n_ensembles": ("int", lambda v: 2 <= v <= 6, "in 2..6"),
        "n_max": ("int", lambda v: v >= 1, ">= 1"),
        "k": ("int", _nonnegative, ">= 0"),
        "raw_target": ("bool", None, ""),
        "dispersive_ratio": ("float", lambda v: 0 < v < 1, "in (0, 1)"),
        "dt_target": ("float", _positive, "> 0"),
        "renorm": ("str", lambda v: v in RENORM_POLICIES,
                   f"one of {RENORM_POLICIES}"),
    },
    "rates": {
        "kappa": ("float", _nonnegative, ">= 0"),
        "gamma_10": ("float", _nonnegative, ">= 0"),
        "gamma_1": ("float", _nonnegative, ">= 0"),
        "gamma_phi": ("float", _nonnegative, ">= 0"),
    },
    "sweep": {
        "points": ("int", lambda v: v >= 2, ">= 2"),
        "rate_max": ("float", _positive, "> 0"),
        "time_points": ("int", lambda v: v >= 2, ">= 2"),
        "t_max_factor": ("float", _positive, "> 0"),
        "t_max": ("optfloat", _positive, "> 0 (empty: derive from "
                  "t_max_factor * protocol time)"),
    },
    "output": {
        "figures": ("bool", None, ""),
        "dpi": ("int", _positive, "> 0"),
        "prefix": ("str", lambda v: v and all(
            c.isalnum() or c in "._-" for c in v),
            "filename-safe (alphanumerics, . _ -)"),
    },
}

# Cells in a rate grid; desk-scale guard from the sweep contract.
MAX_GRID_CELLS = 10_000

# Scenarios whose sweep is a 2-axis rate grid / a 1-axis rate line.
_GRID_2D = ("fig2c", "fig2d")
_GRID_1D = ("fig4c",)


def _base_defaults(name: str) -> dict:
    return {
        "model": {
            "mode": "ri", "alpha_sq": 0.5, "delta": 0.0, "g0": 1.0,
            "eta": 1.0, "n_ensembles": 3, "n_max": 2, "k": 0,
            "raw_target": False, "dispersive_ratio": 0.2,
            "dt_target": 1e-3, "renorm": "off",
        },
        "rates": {"kappa": 0.0, "gamma_10": 0.0, "gamma_1": 0.0,
                  "gamma_phi": 0.0},
        "sweep": {"points": 41, "rate_max": 0.1, "time_points": 600,
                  "t_max_factor": 3.0, "t_max": None},
        "output": {"figures": True, "dpi": 150, "prefix": name},
    }


# Per-scenario deviations from the base defaults.
_SCENARIO_DEFAULTS: dict[str, dict] = {
    "fig2c": {"model": {"mode": "ri"}},
    "fig2d": {"model": {"mode": "di"}},
    "fig3a": {"model": {"mode": "ri"},
              "rates": {"kappa": 0.01, "gamma_10": 0.01, "gamma_1": 0.01,
                        "gamma_phi": 0.01}},
    "fig3b": {"model": {"mode": "di"},
              "rates": {"gamma_10": 0.03, "gamma_1": 0.015,
                        "gamma_phi": 0.015},
              "sweep": {"t_max": 3.0}},
    "fig4b": {"model": {"mode": "w"}},
    "fig4c": {"model": {"mode": "w"},
              "sweep": {"points": 101, "rate_max": 0.05}},
    "params-report": {},
    "validate-dispersive": {"sweep": {"time_points": 1001}},
    "custom": {},
}


@dataclass(frozen=True)
class ResolvedConfig:
    """Fully typed scenario configuration after defaults and overrides."""

    scenario: str
    model: dict
    rates: DecoherenceRates
    sweep: dict
    output: dict

    def flat(self) -> dict:
        """section.key -> value, in registry order, for the metadata file."""
        sections = {"model": self.model,
                    "rates": {"kappa": self.rates.kappa,
                              "gamma_10": self.rates.gamma_10,
                              "gamma_1": self.rates.gamma_1,
                              "gamma_phi": self.rates.gamma_phi},
                    "sweep": self.sweep, "output": self.output}
        out = {}
        for section, keys in _KEYS.items():
            for key in keys:
                out[f"{section}.{key}"] = sections[section][key]
        return out

    def content_hash(self) -> str:
        text = "\n".join(f"{k} = {_format_value(v)}"
                         for k, v in self.flat().items())
        return hashlib.sha256(text.encode()).hexdigest()[:12]


def check_scenario_name(name: str) -> str:
    if name not in SCENARIO_NAMES:
        raise ConfigError(
            f"unknown scenario {name!r}{_suggest(name, SCENARIO_NAMES)}; "
            f"known scenarios: {', '.join(SCENARIO_NAMES)}"
        )
    return name


def scenario_defaults(name: str) -> dict:
    check_scenario_name(name)
    merged = _base_defaults(name)
    for section, overrides in _SCENARIO_DEFAULTS[name].items():
        merged[section].update(overrides)
    return merged


def _coerce(section: str, key: str, raw: str):
    kind, check, requirement = _KEYS[section][key]
    raw = raw.strip()
    try:
        if kind == "bool":
            if raw.lower() not in _BOOL_STATES:
                raise ValueError("expected a boolean")
            value = _BOOL_STATES[raw.lower()]
        elif kind == "int":
            value = int(raw)
        elif kind == "float":
            value = float(raw)
        elif kind == "optfloat":
            value = None if raw == "" else float(raw)
        else:
            value = raw
    except ValueError:
        raise ConfigError(
            f"invalid value for {section}.{key}: {raw!r} "
            f"(expected {kind.replace('opt', 'optional ')})"
        ) from None
    if value is not None and check is not None and not check(value):
        raise ConfigError(
            f"invalid value for {section}.{key}: {raw!r} "
            f"(must be {requirement})"
        )
    return value


def _apply_file(merged: dict, path: str) -> None:
    parser = configparser.ConfigParser(interpolation=None, strict=True)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh, source=path)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    except configparser.Error as exc:
        # configparser messages carry file and line information.
        raise ConfigError(f"config parse error: {exc}") from None

    for section in parser.sections():
        if section not in _KEYS:
            raise ConfigError(
                f"unknown section [{section}]"
                f"{_suggest(section, _KEYS)}"
            )
        for key, raw in parser.items(section):
            if key not in _KEYS[section]:
                candidates = list(_KEYS[section])
                hint = _suggest(key, candidates)
                if not hint:
                    everywhere = [k for sec in _KEYS.values() for k in sec]
                    hint = _suggest(key, everywhere)
                raise ConfigError(
                    f"unknown key {key!r} in [{section}]{hint}"
                )
            merged[section][key] = _coerce(section, key, raw)


def _cross_validate(name: str, merged: dict) -> None:
    points = merged["sweep"]["points"]
    if name in _GRID_2D and points * points > MAX_GRID_CELLS:
        raise ConfigError(
            f"sweep.points = {points} gives a {points}x{points} grid; "
            f"the cell guard is {MAX_GRID_CELLS}"
        )
    if name in _GRID_1D and points > MAX_GRID_CELLS:
        raise ConfigError(
            f"sweep.points = {points} exceeds the cell guard "
            f"{MAX_GRID_CELLS}"
        )
    if name == "validate-dispersive" and merged["sweep"]["time_points"] < 3:
        raise ConfigError("validate-dispersive needs time_points >= 3")


def parse_config(name: str, path: str | None = None) -> ResolvedConfig:
    """Resolve a scenario's configuration, applying the file if given."""
    merged = scenario_defaults(name)
    if path is not None:
        _apply_file(merged, path)
    _cross_validate(name, merged)
    rates = DecoherenceRates(**merged["rates"])
    return ResolvedConfig(scenario=name, model=dict(merged["model"]),
                          rates=rates, sweep=dict(merged["sweep"]),
                          output=dict(merged["output"]))


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value) if isinstance(value, float) else str(value)


def print_defaults(name: str) -> str:
    """Effective defaults for a scenario, as a parseable config file."""
    merged = scenario_defaults(name)
    lines = [f"# defaults for scenario {name}"]
    for section, keys in _KEYS.items():
        lines.append("")
        lines.append(f"[{section}]")
        for key in keys:
            _, _, requirement = _KEYS[section][key]
            if requirement:
                lines.append(f"# {requirement}")
            lines.append(f"{key} = {_format_value(merged[section][key])}")
    return "\n".join(lines) + "\n"
