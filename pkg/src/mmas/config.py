"""JSON run configuration with a versioned schema and strict field checking.

Every section is a dataclass; unknown keys, wrong types and out-of-range
values raise :class:`ConfigError` carrying the dotted field path and, where
it can be located, the line in the source file.
"""
from __future__ import annotations

import json
import json.decoder
import json.scanner
import types
import typing
from dataclasses import MISSING, dataclass, field, fields, is_dataclass
from pathlib import Path

from mmas.vehicle import UNCERTAIN

SCHEMA = "mmas.config/1"


class ConfigError(ValueError):
    def __init__(self, msg: str, path: str = "", line: int | None = None, source: str = "<config>"):
        self.path = path
        self.line = line
        where = source + (f":{line}" if line is not None else "")
        super().__init__(f"{where}: {path + ': ' if path else ''}{msg}")


# --- sections -----------------------------------------------------------------


@dataclass
class SystemConfig:
    kind: str = "vehicle"
    sign_convention: str = "printed"
    row3: str = "kinematic"
    vehicle: dict[str, float] = field(default_factory=dict)  # VehicleParams overrides, SI units
    lower: list[float] | None = None  # synthetic families only
    upper: list[float] | None = None

    _choices = {"sign_convention": ("printed", "standard"), "row3": ("kinematic", "printed")}


@dataclass
class CoordinationPair:
    parameter: str
    entry_a: list[int]  # 1-based (i, j)
    entry_b: list[int]


@dataclass
class AnalysisConfig:
    grid: int = 11
    cross_sections: int = 8
    tol: float = 1e-9
    rank_tol: float = 1e-10
    brute_force_cover: bool = True
    coordination: list[CoordinationPair] = field(default_factory=list)
    coordination_grid: int = 21
    coordination_tol: float = 1e-6
    coverage_samples: int = 10_000
    coverage_tol: float = 1e-6
    coverage_horizon: float = 2.0
    coverage_step: float = 2e-3


@dataclass
class BoundsConfig:
    source: str = "element_bounds"  # element_bounds | explicit
    lb: list[list[float]] | None = None
    ub: list[list[float]] | None = None
    samples: int = 10_000
    rtol: float = 1e-12
    literal: bool = False

    _choices = {"source": ("element_bounds", "explicit")}


@dataclass
class SteeringConfig:
    kind: str = "sine"
    amplitude_deg: float = 2.0
    frequency_hz: float = 0.5
    end_frequency_hz: float = 2.0
    t_start: float = 0.0

    _choices = {"kind": ("sine", "step", "swept_sine", "zero")}


@dataclass
class TrajectoryConfig:
    kind: str = "const"
    value: float = 0.0
    amplitude: float = 0.0
    frequency_hz: float = 0.0
    phase: float = 0.0
    start: float = 0.0
    end: float = 0.0
    t0: float = 0.0
    t1: float = 0.0
    times: list[float] = field(default_factory=list)
    values: list[float] = field(default_factory=list)

    _choices = {"kind": ("const", "sine", "ramp", "piecewise")}


@dataclass
class ScheduleConfig:
    params: dict[str, TrajectoryConfig] = field(default_factory=dict)
    mixture: list[float] | None = None


@dataclass
class ScenarioConfig:
    speed_kmh: float = 50.0
    horizon: float = 5.0
    step: float = 1e-3
    steering: SteeringConfig = field(default_factory=SteeringConfig)
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    disturbance_deg: float = 0.0
    weight_lambda: float = 1e-6
    deadband_factor: float = 1e-9
    models: list[str] | None = None  # subset of selected corner labels, e.g. ["LLLLLL", "HLLLLL"]


@dataclass
class VerifySettings:
    smoke: bool = False
    suites: list[str] | None = None
    corrupt_s: bool = False
    instances: int | None = None  # random instances per suite; None -> default for the mode
    samples: int | None = None  # matrices per interval family
    scenarios: int | None = None  # simulated scenarios per direction


@dataclass
class RunConfig:
    schema: str = SCHEMA
    system: SystemConfig = field(default_factory=SystemConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    bounds: BoundsConfig = field(default_factory=BoundsConfig)
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    verify: VerifySettings = field(default_factory=VerifySettings)


# --- position-tracking JSON decoding --------------------------------------------


class _Obj(dict):
    """dict that remembers the character span of its source object."""

    span: tuple[int, int] = (0, 0)


def _decoder() -> json.JSONDecoder:
    dec = json.JSONDecoder()
    base = json.decoder.JSONObject

    def parse_object(s_and_end, strict, scan_once, object_hook, object_pairs_hook, memo=None, _w=json.decoder.WHITESPACE.match):
        start = s_and_end[1] - 1
        pairs, end = base(s_and_end, strict, scan_once, None, list, memo, _w)
        obj = _Obj()
        for k, v in pairs:
            if k in obj:
                raise json.JSONDecodeError(f"duplicate key {k!r}", s_and_end[0], start)
            obj[k] = v
        obj.span = (start, end)
        return obj, end

    dec.parse_object = parse_object
    dec.scan_once = json.scanner.py_make_scanner(dec)
    return dec


class _Locator:
    def __init__(self, text: str, source: str):
        self.text = text
        self.source = source

    def line_of(self, obj, key: str | None) -> int | None:
        if not isinstance(obj, _Obj):
            return None
        a, b = obj.span
        pos = a
        if key is not None:
            hit = self.text.find(json.dumps(key), a, b)
            pos = hit if hit >= 0 else a
        return self.text.count("\n", 0, pos) + 1

    def error(self, msg, path, obj=None, key=None) -> ConfigError:
        return ConfigError(msg, path, self.line_of(obj, key), self.source)


# --- typed conversion ------------------------------------------------------------


def _type_name(tp) -> str:
    return getattr(tp, "__name__", str(tp))


def _convert(value, tp, path: str, loc: _Locator, parent, key):
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)
    if origin is typing.Union or origin is types.UnionType:
        if value is None and type(None) in args:
            return None
        inner = [a for a in args if a is not type(None)]
        return _convert(value, inner[0], path, loc, parent, key)
    if is_dataclass(tp):
        if not isinstance(value, dict):
            raise loc.error(f"expected an object, got {type(value).__name__}", path, parent, key)
        return _build(tp, value, path, loc)
    if origin is list:
        if not isinstance(value, list):
            raise loc.error(f"expected a list, got {type(value).__name__}", path, parent, key)
        return [_convert(v, args[0], f"{path}[{i}]", loc, parent, key) for i, v in enumerate(value)]
    if origin is dict:
        if not isinstance(value, dict):
            raise loc.error(f"expected an object, got {type(value).__name__}", path, parent, key)
        return {k: _convert(v, args[1], f"{path}.{k}", loc, value, k) for k, v in value.items()}
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise loc.error(f"expected a number, got {json.dumps(value)}", path, parent, key)
        return float(value)
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise loc.error(f"expected an integer, got {json.dumps(value)}", path, parent, key)
        return value
    if tp is bool:
        if not isinstance(value, bool):
            raise loc.error(f"expected true/false, got {json.dumps(value)}", path, parent, key)
        return value
    if tp is str:
        if not isinstance(value, str):
            raise loc.error(f"expected a string, got {json.dumps(value)}", path, parent, key)
        return value
    raise TypeError(f"unsupported config type {_type_name(tp)}")


def _build(cls, data: dict, path: str, loc: _Locator):
    hints = typing.get_type_hints(cls)
    known = {f.name: f for f in fields(cls)}
    for k in data:
        if k not in known:
            allowed = ", ".join(sorted(known))
            raise loc.error(f"unknown field {k!r} (allowed: {allowed})", f"{path}.{k}" if path else k, data, k)
    kwargs = {}
    for name, f in known.items():
        sub = f"{path}.{name}" if path else name
        if name in data:
            kwargs[name] = _convert(data[name], hints[name], sub, loc, data, name)
        elif f.default is MISSING and f.default_factory is MISSING:
            raise loc.error("required field missing", sub, data, None)
    obj = cls(**kwargs)
    for name, allowed in getattr(cls, "_choices", {}).items():
        if getattr(obj, name) not in allowed:
            sub = f"{path}.{name}" if path else name
            raise loc.error(f"{getattr(obj, name)!r} is not one of {allowed}", sub, data, name)
    return obj


def _validate(cfg: RunConfig, raw: dict, loc: _Locator) -> None:
    def fail(msg, path, obj, key):
        raise loc.error(msg, path, obj, key)

    sc, a, b = cfg.scenario, cfg.analysis, cfg.bounds
    rs = raw.get("scenario", {})
    if not sc.step > 0:
        fail("must be > 0", "scenario.step", rs, "step")
    if sc.horizon < 10 * sc.step:
        fail("must be at least 10 steps", "scenario.horizon", rs, "horizon")
    if not sc.speed_kmh > 0:
        fail("must be > 0", "scenario.speed_kmh", rs, "speed_kmh")
    if sc.disturbance_deg < 0:
        fail("must be >= 0", "scenario.disturbance_deg", rs, "disturbance_deg")
    if sc.weight_lambda < 0:
        fail("must be >= 0", "scenario.weight_lambda", rs, "weight_lambda")
    rsched = rs.get("schedule", {}) if isinstance(rs, dict) else {}
    for name in sc.schedule.params:
        if name not in UNCERTAIN:
            fail(f"unknown uncertain parameter (allowed: {', '.join(UNCERTAIN)})", f"scenario.schedule.params.{name}",
                 rsched.get("params", {}), name)
    if sc.schedule.mixture is not None:
        w = sc.schedule.mixture
        if min(w, default=0.0) < 0 or abs(sum(w) - 1.0) > 1e-12:
            fail("mixture weights must be nonnegative and sum to 1", "scenario.schedule.mixture", rsched, "mixture")
    ra = raw.get("analysis", {})
    if a.grid < 3:
        fail("must be >= 3", "analysis.grid", ra, "grid")
    if a.cross_sections < 1:
        fail("must be >= 1", "analysis.cross_sections", ra, "cross_sections")
    if a.coordination_grid < 5:
        fail("must be >= 5", "analysis.coordination_grid", ra, "coordination_grid")
    for i, p in enumerate(a.coordination):
        for nm in ("entry_a", "entry_b"):
            e = getattr(p, nm)
            if len(e) != 2 or min(e) < 1:
                fail("must be a 1-based [row, col] pair", f"analysis.coordination[{i}].{nm}", ra, "coordination")
    rb = raw.get("bounds", {})
    if b.samples < 2:
        fail("must be >= 2", "bounds.samples", rb, "samples")
    if b.source == "explicit" and (b.lb is None or b.ub is None):
        fail("explicit bounds need both lb and ub", "bounds.source", rb, "source")
    rsys = raw.get("system", {})
    if (cfg.system.lower is None) != (cfg.system.upper is None):
        fail("lower and upper must be given together", "system.lower", rsys, "lower")


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    loc = _Locator(text, source)
    try:
        raw = _decoder().decode(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, "", exc.lineno, source) from None
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a JSON object", "", 1, source)
    if "schema" not in raw:
        raise loc.error(f"required field missing (expected {SCHEMA!r})", "schema", raw, None)
    if raw["schema"] != SCHEMA:
        raise loc.error(f"unsupported schema {raw['schema']!r}; this build reads {SCHEMA!r}", "schema", raw, "schema")
    cfg = _build(RunConfig, raw, "", loc)
    _validate(cfg, raw, loc)
    return cfg


def load_config(path: str | Path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", "", None, str(p)) from None
    return parse_config(text, str(p))
