"""Run configuration: YAML documents with explicit unit suffixes.

Powers take ``dBm``, ``dBW``, ``W`` or ``mW``; power ratios take ``dB`` or
``lin``; lengths take ``m`` or ``km`` and may also be bare numbers (meters).
A bare number in a power or ratio field is rejected, since dB and linear
values are easy to confuse.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np
import yaml

from .channel import NetworkScenario

MODES = ("secrecy", "covert", "validate", "sweep")
SWEEP_VARIABLES = ("zeta", "epsilon", "height", "hops")


class ConfigError(ValueError):
    pass


_quantity = {"type": ["string", "number"]}
_positive = {"type": "number", "exclusiveMinimum": 0}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "uavhop run configuration",
    "type": "object",
    "additionalProperties": False,
    "required": ["mode", "scenario", "constraints"],
    "properties": {
        "mode": {"enum": list(MODES)},
        "scenario": {
            "type": "object",
            "additionalProperties": False,
            "required": ["distance_sd", "uav_height", "hops"],
            "properties": {
                "distance_sd": {**_quantity, "description": "source-destination distance, m"},
                "uav_height": {**_quantity, "description": "UAV altitude, m"},
                "hops": {
                    "oneOf": [{"type": "integer", "minimum": 1}, {"const": "auto"}],
                    "description": "hop count, or 'auto' to search 1..constraints.n_max",
                },
                "uav_ground_offset": {**_quantity, "description": "UAV ground projection along the route, m (default: midpoint)"},
                "path_loss_terrestrial": _positive,
                "path_loss_los": _positive,
                "path_loss_nlos": _positive,
                "env_b": _positive,
                "env_c": _positive,
                "excess_nlos": {**_quantity, "description": "NLoS excess attenuation, dB or lin"},
                "noise_normalized": {**_quantity, "description": "sigma_0^2 / lambda_0, dBm/dBW/W/mW"},
                "ref_path_loss": {**_quantity, "description": "path loss at 1 m, dB or lin"},
                "codeword_length": {"type": "integer", "minimum": 1},
            },
        },
        "constraints": {
            "type": "object",
            "additionalProperties": False,
            "required": ["power_total"],
            "properties": {
                "zeta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "epsilon": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "power_total": {**_quantity, "description": "sum power budget, dBm/dBW/W/mW"},
                "n_max": {"type": "integer", "minimum": 1},
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["variable", "min", "max"],
            "properties": {
                "variable": {"enum": list(SWEEP_VARIABLES)},
                "problem": {"enum": ["secrecy", "covert"]},
                "min": {"type": ["number", "string"]},
                "max": {"type": ["number", "string"]},
                "count": {"type": "integer", "minimum": 2},
                "scale": {"enum": ["linear", "log"]},
            },
        },
        "mc": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "trials": {"type": "integer", "minimum": 2},
                "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "path": {"type": "string"},
                "format": {"enum": ["csv", "json"]},
            },
        },
    },
}

_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?|[-+]?inf|nan"
_QTY = re.compile(rf"^\s*({_NUM})\s*([A-Za-z]*)\s*$")


def _split(value, where: str):
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a quantity, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value), ""
    m = _QTY.match(str(value))
    if not m:
        raise ConfigError(f"{where}: cannot parse quantity {value!r}")
    return float(m.group(1)), m.group(2)


def parse_length(value, where: str) -> float:
    x, unit = _split(value, where)
    if unit in ("", "m"):
        return x
    if unit == "km":
        return 1000.0 * x
    raise ConfigError(f"{where}: unknown length unit {unit!r} (use m or km)")


def parse_power(value, where: str) -> float:
    """Power in watts from ``dBm``, ``dBW``, ``W`` or ``mW``."""
    x, unit = _split(value, where)
    if unit == "dBm":
        return 10.0 ** ((x - 30.0) / 10.0)
    if unit == "dBW":
        return 10.0 ** (x / 10.0)
    if unit == "W":
        return x
    if unit == "mW":
        return x / 1000.0
    if unit == "":
        raise ConfigError(f"{where}: bare number {value!r} needs a unit (dBm, dBW, W or mW)")
    raise ConfigError(f"{where}: unknown power unit {unit!r}")


def parse_ratio(value, where: str) -> float:
    x, unit = _split(value, where)
    if unit == "dB":
        return 10.0 ** (x / 10.0)
    if unit == "lin":
        return x
    if unit == "":
        raise ConfigError(f"{where}: bare number {value!r} needs a unit (dB or lin)")
    raise ConfigError(f"{where}: unknown ratio unit {unit!r}")


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    problem: str
    lo: float
    hi: float
    count: Optional[int] = None
    scale: str = "linear"

    def grid(self) -> list:
        if self.variable == "hops":
            lo, hi = int(round(self.lo)), int(round(self.hi))
            if self.count is None:
                return list(range(lo, hi + 1))
            raw = (np.geomspace(lo, hi, self.count) if self.scale == "log"
                   else np.linspace(lo, hi, self.count))
            return list(dict.fromkeys(int(round(v)) for v in raw))
        if self.scale == "log":
            return [float(v) for v in np.geomspace(self.lo, self.hi, self.count)]
        return [float(v) for v in np.linspace(self.lo, self.hi, self.count)]


@dataclass(frozen=True)
class RunConfig:
    mode: str
    scenario: NetworkScenario
    power_total: float
    zeta: Optional[float] = None
    epsilon: Optional[float] = None
    hop_search: bool = False
    n_max: Optional[int] = None
    sweep: Optional[SweepSpec] = None
    trials: int = 100_000
    seed: int = 0
    output_path: Optional[str] = None
    output_format: str = "csv"


def _schema_error(err: jsonschema.ValidationError) -> ConfigError:
    path = ".".join(str(p) for p in err.absolute_path)
    if err.validator == "required":
        missing = re.findall(r"'([^']+)' is a required property", err.message)
        name = ".".join(filter(None, [path, missing[0] if missing else ""]))
        return ConfigError(f"{name}: required field is missing")
    return ConfigError(f"{path or '<root>'}: {err.message}")


def _build(doc: dict) -> RunConfig:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (len(e.absolute_path), e.message))
    if errors:
        raise _schema_error(errors[0])

    sc = doc["scenario"]
    kwargs = {
        "distance_sd": parse_length(sc["distance_sd"], "scenario.distance_sd"),
        "uav_height": parse_length(sc["uav_height"], "scenario.uav_height"),
    }
    hop_search = sc["hops"] == "auto"
    kwargs["hops"] = 1 if hop_search else int(sc["hops"])
    if "uav_ground_offset" in sc:
        kwargs["uav_ground_offset"] = parse_length(sc["uav_ground_offset"], "scenario.uav_ground_offset")
    else:
        kwargs["uav_ground_offset"] = kwargs["distance_sd"] / 2.0
    for name in ("path_loss_terrestrial", "path_loss_los", "path_loss_nlos", "env_b", "env_c"):
        if name in sc:
            kwargs[name] = float(sc[name])
    if "codeword_length" in sc:
        kwargs["codeword_length"] = int(sc["codeword_length"])
    if "excess_nlos" in sc:
        kwargs["excess_nlos"] = parse_ratio(sc["excess_nlos"], "scenario.excess_nlos")
    if "ref_path_loss" in sc:
        kwargs["ref_path_loss"] = parse_ratio(sc["ref_path_loss"], "scenario.ref_path_loss")
    if "noise_normalized" in sc:
        kwargs["noise_normalized"] = parse_power(sc["noise_normalized"], "scenario.noise_normalized")
    try:
        scenario = NetworkScenario(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"scenario: {exc}") from None

    cons = doc["constraints"]
    power_total = parse_power(cons["power_total"], "constraints.power_total")
    if not power_total > 0 or math.isinf(power_total):
        raise ConfigError("constraints.power_total: must be positive and finite")
    zeta, epsilon, n_max = cons.get("zeta"), cons.get("epsilon"), cons.get("n_max")
    if hop_search and n_max is None:
        raise ConfigError("constraints.n_max: required when scenario.hops is 'auto'")

    mode = doc["mode"]
    sweep = None
    if mode == "sweep":
        if "sweep" not in doc:
            raise ConfigError("sweep: required field is missing for mode 'sweep'")
        sw = doc["sweep"]
        var = sw["variable"]
        problem = {"zeta": "secrecy", "epsilon": "covert"}.get(var, sw.get("problem"))
        if problem is None and (zeta is None) != (epsilon is None):
            problem = "secrecy" if zeta is not None else "covert"
        if problem is None:
            raise ConfigError(f"sweep.problem: required when sweeping {var!r}")
        if sw.get("problem", problem) != problem:
            raise ConfigError(f"sweep.problem: {var!r} sweeps imply problem {problem!r}")
        parse = parse_length if var == "height" else (lambda v, w: _split(v, w)[0])
        lo, hi = parse(sw["min"], "sweep.min"), parse(sw["max"], "sweep.max")
        if not lo < hi:
            raise ConfigError("sweep.max: must exceed sweep.min")
        count = sw.get("count")
        if count is None and var != "hops":
            raise ConfigError("sweep.count: required field is missing")
        scale = sw.get("scale", "linear")
        if scale == "log" and lo <= 0:
            raise ConfigError("sweep.min: log grids need a positive minimum")
        sweep = SweepSpec(var, problem, lo, hi, count, scale)
        if problem == "secrecy" and var != "zeta" and zeta is None:
            raise ConfigError("constraints.zeta: required for a secrecy sweep")
        if problem == "covert" and var != "epsilon" and epsilon is None:
            raise ConfigError("constraints.epsilon: required for a covert sweep")
    elif "sweep" in doc:
        raise ConfigError(f"sweep: only allowed with mode 'sweep', not {mode!r}")
    if mode == "secrecy" and zeta is None:
        raise ConfigError("constraints.zeta: required for mode 'secrecy'")
    if mode == "covert" and epsilon is None:
        raise ConfigError("constraints.epsilon: required for mode 'covert'")
    if mode == "validate" and zeta is None and epsilon is None:
        raise ConfigError("constraints: mode 'validate' needs zeta and/or epsilon")

    mc = doc.get("mc", {})
    out = doc.get("output", {})
    return RunConfig(
        mode=mode,
        scenario=scenario,
        power_total=power_total,
        zeta=None if zeta is None else float(zeta),
        epsilon=None if epsilon is None else float(epsilon),
        hop_search=hop_search,
        n_max=n_max,
        sweep=sweep,
        trials=int(mc.get("trials", 100_000)),
        seed=int(mc.get("seed", 0)),
        output_path=out.get("path"),
        output_format=out.get("format", "csv"),
    )


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads exponent floats without a dot (``1e-3``)."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"^[-+]?(?:\d+\.?\d*|\.\d+)[eE][-+]?\d+$"),
    list("-+0123456789."),
)


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    try:
        doc = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError(f"{source}: parse error at {where}: {problem}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{source}: top level must be a mapping")
    return _build(doc)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from None
    return parse_config(text, str(path))


def config_to_dict(cfg: RunConfig) -> dict:
    """Resolved configuration with every default filled in and linear units."""
    s = cfg.scenario
    scenario = {
        "distance_sd": f"{s.distance_sd!r} m",
        "uav_height": f"{s.uav_height!r} m",
        "hops": "auto" if cfg.hop_search else s.hops,
        "uav_ground_offset": f"{s.ground_offset!r} m",
        "path_loss_terrestrial": s.path_loss_terrestrial,
        "path_loss_los": s.path_loss_los,
        "path_loss_nlos": s.path_loss_nlos,
        "env_b": s.env_b,
        "env_c": s.env_c,
        "excess_nlos": f"{s.excess_nlos!r} lin",
        "noise_normalized": f"{s.noise_normalized!r} W",
        "ref_path_loss": f"{s.ref_path_loss!r} lin",
        "codeword_length": s.codeword_length,
    }
    constraints = {"power_total": f"{cfg.power_total!r} W"}
    if cfg.zeta is not None:
        constraints["zeta"] = cfg.zeta
    if cfg.epsilon is not None:
        constraints["epsilon"] = cfg.epsilon
    if cfg.n_max is not None:
        constraints["n_max"] = cfg.n_max
    doc = {"mode": cfg.mode, "scenario": scenario, "constraints": constraints}
    if cfg.sweep is not None:
        sw = cfg.sweep
        doc["sweep"] = {"variable": sw.variable, "problem": sw.problem, "min": sw.lo,
                        "max": sw.hi, "scale": sw.scale}
        if sw.count is not None:
            doc["sweep"]["count"] = sw.count
    doc["mc"] = {"trials": cfg.trials, "seed": cfg.seed}
    doc["output"] = {"format": cfg.output_format}
    if cfg.output_path is not None:
        doc["output"]["path"] = cfg.output_path
    return doc


def dump_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False)
