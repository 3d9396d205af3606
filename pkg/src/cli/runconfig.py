# src/cli/runconfig.py
"""Run configuration: schema, named presets and layered parsing.

Values are resolved in the order defaults < preset < config file < --set < flags.
Every violation is collected before a single ConfigError is raised.
"""
import configparser
import json
import logging
import math
from dataclasses import dataclass

import numpy as np

from src.cli.verify import VerifyConfig
from src.core.covariance import Scenario, ScenarioParams
from src.core.errors import ConfigError
from src.core.filters import FilterFamily, FilterSpec
from src.core.measures import BellConfig
from src.core.oracle import QuadratureConfig
from src.core.sweeps import Measure, SweepAxis

logger = logging.getLogger('tmss')

COMMANDS = ("evolve", "sweep", "extrema", "verify")
FORMATS = ("csv", "json")
REQUIRED = object()
# fields left out of output metadata so the output path does not change the bytes
UNRECORDED = ("run.out",)


def _float(value):
    if isinstance(value, bool):
        raise ValueError("expected a number")
    result = float(value)
    if not math.isfinite(result):
        raise ValueError("must be finite")
    return result


def _int(value):
    if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
        raise ValueError("expected an integer")
    return int(value)


def _seed(value):
    result = _int(value)
    if not 0 <= result < 2 ** 64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return result


def _bool(value):
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got '{value}'")


def _float_list(value):
    if value is None:
        return None
    if isinstance(value, str):
        items = [item for item in value.replace(";", ",").split(",") if item.strip()]
    elif isinstance(value, (list, tuple)):
        items = list(value)
    else:
        items = [value]
    return [_float(item) for item in items]


def _choice(options, normalize = str):
    def convert(value):
        text = normalize(str(value).strip())
        if text not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return text
    return convert


SCHEMA = {
    "run": {
        "command": (_choice(COMMANDS, str.lower), "evolve"),
        "measure": (_choice(tuple(m.value for m in Measure), str.upper), "EN"),
        "format": (_choice(FORMATS, str.lower), "csv"),
        "out": (str, "-"),
        "seed": (_seed, 0),
    },
    "scenario": {
        "scenario": (_choice(tuple(s.value for s in Scenario), str.upper), REQUIRED),
        "r": (_float, 1.0),
        "n_i": (_float, 0.0),
        "n_s": (_float, 0.0),
        "kappa_i": (_float, 0.1),
        "kappa_s": (_float, 0.1),
    },
    "filter_I": {
        "family": (_choice(tuple(f.value for f in FilterFamily), str.lower), "step"),
        "omega": (_float, 1.0),
        "tau": (_float, 0.2),
    },
    "filter_S": {
        "family": (_choice(tuple(f.value for f in FilterFamily), str.lower), "step"),
        "omega": (_float, 1.0),
        "tau": (_float, 0.2),
    },
    "grid": {
        "T_start": (_float, 0.0),
        "T_stop": (_float, 0.99),
        "points": (_int, 64),
        "T_values": (_float_list, None),
    },
    "sweep": {
        "axis": (_choice(tuple(a.value for a in SweepAxis), str.upper), "R"),
        "start": (_float, 0.0),
        "stop": (_float, 2.0),
        "points": (_int, 41),
        "values": (_float_list, None),
        "T": (_float, 0.5),
    },
    "extrema": {
        "T_values": (_float_list, [0.5]),
        "r_lo": (_float, 0.0),
        "r_hi": (_float, 4.0),
    },
    "bell": {
        "n_restarts": (_int, 16),
        "xtol": (_float, 1e-7),
        "ftol": (_float, 1e-10),
        "max_fev": (_int, 20000),
    },
    "quadrature": {
        "rel_tol": (_float, 1e-9),
        "abs_tol": (_float, 1e-12),
        "max_subdivisions": (_int, 2000),
    },
    "verify": {
        "draws": (_int, 1000),
        "rel_tol": (_float, 1e-6),
        "abs_tol": (_float, 1e-10),
        "kernel_rel_tol": (_float, 1e-8),
        "bell_checks": (_bool, True),
        "grid_points": (_int, 7),
    },
}


def _preset(scenario, r, n, kappa, omega_s, tau_s, measure):
    return {
        "run": {"measure": measure},
        "scenario": {"scenario": scenario, "r": r, "n_i": n, "n_s": n, "kappa_i": kappa, "kappa_s": kappa},
        "filter_I": {"family": "step", "omega": 1.0, "tau": 0.2},
        "filter_S": {"family": "step", "omega": omega_s, "tau": tau_s},
    }


# fig6..fig9 repeat the fig2..fig5 parameters with decoherence after the squeezer.
PRESETS = {
    "fig2": _preset("TMSTDF", 1.0, 0.6, 0.07, 1.0, 0.2, "EN"),
    "fig3": _preset("TMSTDF", 1.0, 0.6, 0.07, 1.02, 0.208, "EN"),
    "fig4": _preset("TMSTDF", 0.4, 0.1, 0.1, 1.0, 0.2, "BMAX"),
    "fig5": _preset("TMSTDF", 0.4, 0.1, 0.1, 1.01, 0.205, "BMAX"),
    "fig6": _preset("TDTMSV", 1.0, 0.6, 0.07, 1.0, 0.2, "EN"),
    "fig7": _preset("TDTMSV", 1.0, 0.6, 0.07, 1.02, 0.208, "EN"),
    "fig8": _preset("TDTMSV", 0.4, 0.1, 0.1, 1.0, 0.2, "BMAX"),
    "fig9": _preset("TDTMSV", 0.4, 0.1, 0.1, 1.01, 0.205, "BMAX"),
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    measure: Measure
    params: ScenarioParams
    T_grid: tuple
    sweep_axis: SweepAxis
    sweep_values: tuple
    sweep_T: float
    extrema_T: tuple
    r_search: tuple
    bell: BellConfig
    quadrature: QuadratureConfig
    verify: VerifyConfig
    seed: int
    out: str
    format: str
    preset: str
    resolved: dict
    defaults_used: tuple

    def metadata(self):
        """Provenance block embedded in every output file."""
        return {"command": self.command, "preset": self.preset, "seed": self.seed,
                "params": self.resolved,
                "defaults_used": [p for p in self.defaults_used if p not in UNRECORDED]}


def parse_config_text(text, fmt = "ini"):
    """Raw {section: {key: value}} from INI or JSON text."""
    if fmt == "json" or (fmt == "auto" and text.lstrip().startswith("{")):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError([("config", f"invalid JSON: {e}")]) from e
        if not isinstance(data, dict) or not all(isinstance(v, dict) for v in data.values()):
            raise ConfigError([("config", "JSON config must map section names to objects")])
        return data

    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ConfigError([("config", f"invalid INI: {e}")]) from e
    return {section: dict(parser.items(section)) for section in parser.sections()}


def load_config_file(path):
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    fmt = "json" if str(path).lower().endswith(".json") else "auto"
    logger.debug(f"Loaded run configuration from {path}")
    return parse_config_text(text, fmt)


def parse_overrides(items):
    """`section.key=value` strings to a raw layer; malformed items become violations."""
    layer, violations = {}, []
    for item in items or ():
        key, sep, value = item.partition("=")
        section, dot, option = key.strip().partition(".")
        if not sep or not dot or not section or not option:
            violations.append(("--set", f"expected section.key=value, got '{item}'"))
            continue
        layer.setdefault(section, {})[option] = value.strip()
    return layer, violations


def _check_T(values, path, violations):
    if any(not 0.0 <= v < 1.0 for v in values):
        violations.append((path, "T values must lie in [0, 1)"))
    elif any(b <= a for a, b in zip(values, values[1:])):
        violations.append((path, "must be strictly increasing"))


def _grid(start, stop, points):
    return np.linspace(start, stop, points).tolist() if points > 1 else [start]


def parse_config(text = None, fmt = "auto", preset = None, overrides = (), flags = None, file_layer = None):
    """Validated RunConfig from defaults, a preset, config text, --set overrides and flags."""
    violations = []
    layers = []
    if preset is not None:
        if preset not in PRESETS:
            violations.append(("preset", f"unknown preset '{preset}'; one of {', '.join(PRESETS)}"))
        else:
            layers.append(PRESETS[preset])
    if text is not None:
        layers.append(parse_config_text(text, fmt))
    if file_layer is not None:
        layers.append(file_layer)
    set_layer, set_violations = parse_overrides(overrides)
    violations.extend(set_violations)
    layers.append(set_layer)
    layers.append({"run": {k: v for k, v in (flags or {}).items() if v is not None}})

    raw = {}
    for layer in layers:
        for section, values in layer.items():
            if section not in SCHEMA:
                violations.append((section, "unknown section"))
                continue
            for key, value in values.items():
                if key not in SCHEMA[section]:
                    violations.append((f"{section}.{key}", "unknown field"))
                    continue
                raw.setdefault(section, {})[key] = value

    values, defaults_used = {}, []
    for section, fields in SCHEMA.items():
        for key, (convert, default) in fields.items():
            path = f"{section}.{key}"
            if key in raw.get(section, {}):
                try:
                    values[path] = convert(raw[section][key])
                except (TypeError, ValueError) as e:
                    violations.append((path, str(e)))
                    values[path] = None
            elif default is REQUIRED:
                # verify draws its own scenarios
                if values.get("run.command") != "verify":
                    violations.append((path, "required field is missing"))
                values[path] = None
            else:
                values[path] = default
                defaults_used.append(path)

    params = _build_params(values, violations)
    T_grid = values["grid.T_values"]
    if T_grid is None and None not in (values["grid.T_start"], values["grid.T_stop"], values["grid.points"]):
        if values["grid.points"] < 1:
            violations.append(("grid.points", "must be >= 1"))
        else:
            T_grid = _grid(values["grid.T_start"], values["grid.T_stop"], values["grid.points"])
    if T_grid is not None:
        _check_T(T_grid, "grid", violations)

    sweep_values = values["sweep.values"]
    if sweep_values is None and None not in (values["sweep.start"], values["sweep.stop"], values["sweep.points"]):
        if values["sweep.points"] < 1:
            violations.append(("sweep.points", "must be >= 1"))
        else:
            sweep_values = _grid(values["sweep.start"], values["sweep.stop"], values["sweep.points"])
    if sweep_values is not None:
        _check_sweep(values["sweep.axis"], sweep_values, violations)
    if values["sweep.T"] is not None:
        _check_T([values["sweep.T"]], "sweep.T", violations)

    extrema_T = values["extrema.T_values"]
    if extrema_T is not None:
        if not extrema_T:
            violations.append(("extrema.T_values", "must not be empty"))
        _check_T(extrema_T, "extrema.T_values", violations)
    r_lo, r_hi = values["extrema.r_lo"], values["extrema.r_hi"]
    if None not in (r_lo, r_hi) and not 0.0 <= r_lo < r_hi:
        violations.append(("extrema", "r_lo and r_hi must satisfy 0 <= r_lo < r_hi"))

    _check_positive(values, violations, ("bell.xtol", "bell.ftol", "quadrature.rel_tol", "quadrature.abs_tol",
                                         "verify.rel_tol", "verify.abs_tol", "verify.kernel_rel_tol"))
    for path, lowest in (("bell.n_restarts", 0), ("bell.max_fev", 1), ("quadrature.max_subdivisions", 1),
                         ("verify.draws", 1), ("verify.grid_points", 3)):
        if values[path] is not None and values[path] < lowest:
            violations.append((path, f"must be >= {lowest}"))

    if violations:
        raise ConfigError(violations)

    seed = values["run.seed"]
    config = RunConfig(
        command=values["run.command"],
        measure=Measure(values["run.measure"]),
        params=params,
        T_grid=tuple(T_grid),
        sweep_axis=SweepAxis(values["sweep.axis"]),
        sweep_values=tuple(sweep_values),
        sweep_T=values["sweep.T"],
        extrema_T=tuple(extrema_T),
        r_search=(r_lo, r_hi),
        bell=BellConfig(n_restarts=values["bell.n_restarts"], xtol=values["bell.xtol"], ftol=values["bell.ftol"],
                        max_fev=values["bell.max_fev"], seed=seed),
        quadrature=QuadratureConfig(rel_tol=values["quadrature.rel_tol"], abs_tol=values["quadrature.abs_tol"],
                                    max_subdivisions=values["quadrature.max_subdivisions"]),
        verify=VerifyConfig(draws=values["verify.draws"], rel_tol=values["verify.rel_tol"],
                            abs_tol=values["verify.abs_tol"], kernel_rel_tol=values["verify.kernel_rel_tol"],
                            bell_checks=values["verify.bell_checks"], grid_points=values["verify.grid_points"]),
        seed=seed,
        out=values["run.out"],
        format=values["run.format"],
        preset=preset or "",
        resolved=_resolved(values),
        defaults_used=tuple(defaults_used),
    )
    logger.debug(f"Parsed run configuration: {config.resolved}")
    return config


def _check_positive(values, violations, paths):
    for path in paths:
        if values[path] is not None and not values[path] > 0:
            violations.append((path, "must be > 0"))


def _check_sweep(axis, sweep_values, violations):
    if not sweep_values:
        violations.append(("sweep.values", "must not be empty"))
        return
    if any(b <= a for a, b in zip(sweep_values, sweep_values[1:])):
        violations.append(("sweep.values", "must be strictly increasing"))
    if axis in ("R", "N") and min(sweep_values) < 0:
        violations.append(("sweep.values", f"{axis} values must be >= 0"))
    if axis in ("KAPPA", "TAU_S") and min(sweep_values) <= 0:
        violations.append(("sweep.values", f"{axis} values must be > 0"))


def _build_params(values, violations):
    """ScenarioParams from resolved values; range violations are appended, not raised."""
    for key in ("r", "n_i", "n_s"):
        value = values[f"scenario.{key}"]
        if value is not None and value < 0:
            violations.append((f"scenario.{key}", "must be >= 0"))
    for key in ("kappa_i", "kappa_s"):
        value = values[f"scenario.{key}"]
        if value is not None and not value > 0:
            violations.append((f"scenario.{key}", "must be > 0"))
    for section in ("filter_I", "filter_S"):
        tau = values[f"{section}.tau"]
        if tau is not None and not tau > 0:
            violations.append((f"{section}.tau", "tau must be > 0"))
    families = (values["filter_I.family"], values["filter_S.family"])
    if None not in families and families[0] != families[1]:
        violations.append(("filter_S.family", "must match filter_I.family"))
    if violations or values["scenario.scenario"] is None:
        return None

    filters = [FilterSpec(values[f"{s}.family"], values[f"{s}.omega"], values[f"{s}.tau"])
               for s in ("filter_I", "filter_S")]
    return ScenarioParams(scenario=values["scenario.scenario"], r=values["scenario.r"],
                          n_i=values["scenario.n_i"], n_s=values["scenario.n_s"],
                          kappa_i=values["scenario.kappa_i"], kappa_s=values["scenario.kappa_s"],
                          filter_i=filters[0], filter_s=filters[1])


def _resolved(values):
    resolved = {}
    for path, value in values.items():
        if path in UNRECORDED:
            continue
        section, key = path.split(".", 1)
        resolved.setdefault(section, {})[key] = value
    return resolved
