"""Run configuration and CSV input/output.

The configuration is a JSON object. Every physical field carries its SI unit
in the key (``radius_m``, ``bulk_diffusivity_m2_per_s``, ...); unknown keys
are rejected so a missing or wrong suffix cannot slip through. See
``README.md`` for an annotated example.
"""

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .model import DEFAULT_TRUNCATION, ModelParams, ReleaseCurve
from .oracle import GridSpec

__all__ = [
    "ConfigError",
    "RunConfig",
    "FitSpec",
    "load_config",
    "parse_config",
    "read_release_csv",
    "write_csv",
    "format_float",
]

RELEASE_HEADER = ("time_s", "fraction_released")


class ConfigError(ValueError):
    """Invalid configuration or input file; the message names the culprit."""


_PARAM_FIELDS = {
    "radius_m": "radius",
    "height_m": "height",
    "bulk_diffusivity_m2_per_s": "bulk_diffusivity",
    "coating_diffusivity_m2_per_s": "coating_diffusivity",
    "coating_thickness_m": "coating_thickness",
    "boundary_mode": "boundary_mode",
    "dirichlet_biot": "dirichlet_biot",
    "permeability_override_m_per_s": "permeability_override",
}
_KNOWN_COATING = {
    "coating_diffusivity_m2_per_s": "coating_diffusivity",
    "coating_thickness_m": "coating_thickness",
}
_INTERVAL_KEYS = {
    "interval_m2_per_s": ("bulk_diffusivity", "coating_diffusivity"),
    "interval_m": ("coating_thickness",),
}
_TOP_KEYS = {"params", "truncation", "times", "grid", "fit", "concentration", "output_dir"}


@dataclass
class FitSpec:
    uncoated: dict | None = None
    coated: list = field(default_factory=list)
    bulk_diffusivity: float | None = None
    rel_tol: float = 1e-6
    max_iter: int = 200


@dataclass
class RunConfig:
    params: ModelParams
    truncation: tuple = DEFAULT_TRUNCATION
    times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    grid: GridSpec = field(default_factory=GridSpec)
    fit: FitSpec | None = None
    concentration: dict = field(default_factory=lambda: {"time_s": 0.0, "nr": 21, "nz": 21})
    output_dir: str = "."
    base_dir: str = "."


def _unknown(section, keys, allowed):
    extra = sorted(set(keys) - set(allowed))
    if extra:
        raise ConfigError(
            f"{section}.{extra[0]}: unknown field (physical fields need an SI unit suffix, "
            f"allowed: {', '.join(sorted(allowed))})"
        )


def _number(value, where, positive=False, allow_zero=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{where}: expected a finite number, got {value!r}")
    if positive and not (value > 0 or (allow_zero and value == 0)):
        raise ConfigError(f"{where}: must be {'non-negative' if allow_zero else 'positive'}, got {value!r}")
    return float(value)


def _params(raw):
    if not isinstance(raw, dict):
        raise ConfigError("params: expected an object")
    _unknown("params", raw, _PARAM_FIELDS)
    kwargs = {}
    for key, value in raw.items():
        name = _PARAM_FIELDS[key]
        if value is None:
            continue
        if name == "boundary_mode":
            if value not in ("robin", "dirichlet"):
                raise ConfigError(f"params.{key}: expected 'robin' or 'dirichlet', got {value!r}")
            kwargs[name] = value
        else:
            kwargs[name] = _number(value, f"params.{key}", positive=True,
                                   allow_zero=name == "permeability_override")
    for key in ("radius_m", "height_m", "bulk_diffusivity_m2_per_s"):
        if key not in raw or raw[key] is None:
            raise ConfigError(f"params.{key}: required field missing")
    try:
        return ModelParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"params: {exc}") from None


def _times(raw):
    if raw is None:
        return np.zeros(0)
    if not isinstance(raw, dict):
        raise ConfigError("times: expected an object")
    if "values_s" in raw:
        _unknown("times", raw, {"values_s"})
        values = raw["values_s"]
        if not isinstance(values, list):
            raise ConfigError("times.values_s: expected a list")
        times = np.array([_number(v, f"times.values_s[{i}]") for i, v in enumerate(values)])
    else:
        _unknown("times", raw, {"start_s", "end_s", "count", "spacing"})
        for key in ("start_s", "end_s", "count"):
            if key not in raw:
                raise ConfigError(f"times.{key}: required field missing")
        start = _number(raw["start_s"], "times.start_s")
        end = _number(raw["end_s"], "times.end_s")
        count = raw["count"]
        if isinstance(count, bool) or not isinstance(count, int) or count < 0:
            raise ConfigError(f"times.count: expected a non-negative integer, got {count!r}")
        spacing = raw.get("spacing", "linear")
        if spacing == "linear":
            times = np.linspace(start, end, count)
        elif spacing == "log":
            if not start > 0:
                raise ConfigError("times.start_s: must be positive for log spacing")
            times = np.geomspace(start, end, count)
        else:
            raise ConfigError(f"times.spacing: expected 'linear' or 'log', got {spacing!r}")
    if np.any(times < 0) or np.any(np.diff(times) <= 0):
        raise ConfigError("times: values must be non-negative and strictly increasing")
    return times


def _grid(raw):
    if raw is None:
        return GridSpec()
    _unknown("grid", raw, {"nr", "nz", "dt_s", "t_end_s"})
    kwargs = {}
    for key in ("nr", "nz"):
        if key in raw:
            v = raw[key]
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ConfigError(f"grid.{key}: expected a positive integer, got {v!r}")
            kwargs[key] = v
    if raw.get("dt_s") is not None:
        kwargs["dt"] = _number(raw["dt_s"], "grid.dt_s", positive=True)
    if raw.get("t_end_s") is not None:
        kwargs["t_end"] = _number(raw["t_end_s"], "grid.t_end_s", positive=True)
    return GridSpec(**kwargs)


def _interval(raw, where, parameter):
    for key, names in _INTERVAL_KEYS.items():
        if key in raw:
            if parameter is not None and parameter not in names:
                raise ConfigError(f"{where}.{key}: wrong unit for the fitted {parameter}")
            pair = raw[key]
            if not (isinstance(pair, list) and len(pair) == 2):
                raise ConfigError(f"{where}.{key}: expected [lo, hi]")
            lo = _number(pair[0], f"{where}.{key}[0]", positive=True)
            hi = _number(pair[1], f"{where}.{key}[1]", positive=True)
            if not lo < hi:
                raise ConfigError(f"{where}.{key}: lo must be below hi")
            return (lo, hi)
    return None


def _fit(raw):
    if raw is None:
        return None
    _unknown("fit", raw, {"uncoated", "coated", "bulk_diffusivity_m2_per_s", "rel_tol", "max_iter"})
    spec = FitSpec()
    if raw.get("bulk_diffusivity_m2_per_s") is not None:
        spec.bulk_diffusivity = _number(raw["bulk_diffusivity_m2_per_s"], "fit.bulk_diffusivity_m2_per_s",
                                        positive=True)
    if "rel_tol" in raw:
        spec.rel_tol = _number(raw["rel_tol"], "fit.rel_tol", positive=True)
    if "max_iter" in raw:
        spec.max_iter = int(_number(raw["max_iter"], "fit.max_iter", positive=True))
    if raw.get("uncoated") is not None:
        u = raw["uncoated"]
        _unknown("fit.uncoated", u, {"data", "interval_m2_per_s"})
        spec.uncoated = {"data": u.get("data"), "interval": _interval(u, "fit.uncoated", "bulk_diffusivity")}
    for i, c in enumerate(raw.get("coated", [])):
        where = f"fit.coated[{i}]"
        _unknown(where, c, {"data", "label", *_KNOWN_COATING, *_INTERVAL_KEYS})
        known = {}
        for key, name in _KNOWN_COATING.items():
            if c.get(key) is None:
                continue
            known[name] = c[key] if c[key] == "previous" else _number(c[key], f"{where}.{key}", positive=True)
        if not known:
            raise ConfigError(f"{where}: give coating_thickness_m or coating_diffusivity_m2_per_s")
        free = [n for n in _KNOWN_COATING.values() if n not in known]
        spec.coated.append({
            "data": c.get("data"),
            "label": c.get("label", f"coated{i + 1}"),
            "known": known,
            "interval": _interval(c, where, free[0] if free else None),
        })
    return spec


def parse_config(raw, base_dir="."):
    """Validate a decoded JSON object into a :class:`RunConfig`."""
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be an object")
    _unknown("config", raw, _TOP_KEYS)
    if "params" not in raw:
        raise ConfigError("config.params: required section missing")
    cfg = RunConfig(params=_params(raw["params"]), base_dir=base_dir)
    if "truncation" in raw:
        tr = raw["truncation"]
        if not (isinstance(tr, list) and len(tr) == 2 and all(isinstance(v, int) and v > 0 for v in tr)):
            raise ConfigError(f"truncation: expected [N, M] positive integers, got {tr!r}")
        cfg.truncation = tuple(tr)
    cfg.times = _times(raw.get("times"))
    cfg.grid = _grid(raw.get("grid"))
    cfg.fit = _fit(raw.get("fit"))
    if "concentration" in raw:
        c = raw["concentration"]
        _unknown("concentration", c, {"time_s", "nr", "nz"})
        cfg.concentration = {
            "time_s": _number(c.get("time_s", 0.0), "concentration.time_s", positive=True, allow_zero=True),
            "nr": int(_number(c.get("nr", 21), "concentration.nr", positive=True)),
            "nz": int(_number(c.get("nz", 21), "concentration.nz", positive=True)),
        }
    cfg.output_dir = raw.get("output_dir", ".")
    return cfg


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: {path} line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_config(raw, base_dir=os.path.dirname(os.path.abspath(path)))


def read_release_csv(path, max_fraction=1.05):
    """Read ``time_s,fraction_released[,rep2,...]`` into a ReleaseCurve.

    Replicate columns are averaged into ``fractions`` and kept in
    ``replicates``.
    """
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read: {exc.strerror}") from None
    if not rows or tuple(c.strip() for c in rows[0][:2]) != RELEASE_HEADER:
        raise ConfigError(f"{path}: header must start with time_s,fraction_released")
    width = len(rows[0])
    times, values = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != width:
            raise ConfigError(f"{path} row {lineno}: expected {width} columns, got {len(row)}")
        try:
            nums = [float(c) for c in row]
        except ValueError:
            raise ConfigError(f"{path} row {lineno}: non-numeric value in {row!r}") from None
        if not all(math.isfinite(v) for v in nums):
            raise ConfigError(f"{path} row {lineno}: non-finite value")
        for v in nums[1:]:
            if v < 0 or v > max_fraction:
                raise ConfigError(f"{path} row {lineno}: fraction {v!r} outside [0, {max_fraction}]")
        times.append(nums[0])
        values.append(nums[1:])
    times = np.array(times)
    if np.any(times < 0):
        raise ConfigError(f"{path}: negative time")
    bad = np.flatnonzero(np.diff(times) <= 0)
    if len(bad):
        raise ConfigError(f"{path} row {bad[0] + 3}: time column is not strictly increasing")
    reps = np.array(values).reshape(len(times), width - 1)
    return ReleaseCurve(times, reps.mean(axis=1), reps if width > 2 else None)


def format_float(x):
    return repr(float(x))


def write_csv(path, header, columns):
    """Write columns of numbers with a header; LF line endings, shortest repr."""
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in zip(*columns):
        buf.write(",".join(str(v) if isinstance(v, (int, np.integer)) else format_float(v) for v in row) + "\n")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())
