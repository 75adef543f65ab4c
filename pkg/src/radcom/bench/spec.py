"""Experiment specification files: flat ``key = value`` text with ``#`` comments."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..model import SystemConfig

__all__ = [
    "SCENARIOS",
    "METHODS",
    "Method",
    "ExperimentSpec",
    "SpecError",
    "parse_spec",
    "parse_spec_text",
    "parse_method",
]

SCENARIOS = (
    "sumrate_vs_snr",
    "tradeoff_sweep",
    "beampattern_dump",
    "bnb_trace",
    "sumrate_vs_epsilon",
    "pulse_compression",
)

METHODS = ("ZF", "OmniStrict", "DirectionalStrict", "Tradeoff", "CmBnb", "Awgn", "Desired", "QpLb")

_SCENARIO_METHODS = {
    "sumrate_vs_snr": {"ZF", "OmniStrict", "DirectionalStrict", "Tradeoff", "Awgn", "CmBnb"},
    "tradeoff_sweep": {"Tradeoff"},
    "beampattern_dump": {"ZF", "OmniStrict", "DirectionalStrict", "Tradeoff", "Desired"},
    "bnb_trace": {"CmBnb"},
    "sumrate_vs_epsilon": {"CmBnb", "QpLb", "Awgn"},
    "pulse_compression": {"CmBnb"},
}

_DEFAULT_METHODS = {
    "sumrate_vs_snr": "ZF, OmniStrict, DirectionalStrict, Tradeoff(0.1), Awgn",
    "tradeoff_sweep": "Tradeoff",
    "beampattern_dump": "Desired, OmniStrict, DirectionalStrict, Tradeoff(0.1)",
    "bnb_trace": "CmBnb(ARS), CmBnb(BRS)",
    "sumrate_vs_epsilon": "CmBnb, QpLb, Awgn",
    "pulse_compression": "CmBnb",
}

_DEFAULT_SWEEP = {
    "sumrate_vs_snr": "-4, -2, 0, 2, 4, 6, 8, 10, 12",
    "tradeoff_sweep": "0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1",
    "beampattern_dump": "-90:90:1",
    "bnb_trace": "1",
    "sumrate_vs_epsilon": "0.1, 0.5, 1, 1.5, 2",
    "pulse_compression": "0.05, 0.4, 1",
}

# pattern dumps need few realizations, and the constant-modulus scenarios run
# a branch-and-bound per column, so these default to fewer seeds
_DEFAULT_SEEDS = {
    "beampattern_dump": "0:10",
    "bnb_trace": "0:5",
    "sumrate_vs_epsilon": "0:5",
    "pulse_compression": "0:5",
}

# large similarity tolerances leave wide arcs at N = 16; a looser gap and a
# per-column cap keep the sweep within a desk-scale budget
_DEFAULT_OPTIONS = {
    "sumrate_vs_epsilon": {"delta": 1e-4, "max_iters": 1000},
}


class SpecError(ValueError):
    """Invalid experiment specification; carries the offending line when known."""

    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        self.line = line
        self.key = key
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class Method:
    name: str
    param: float | str | None = None

    def __str__(self):
        if self.param is None:
            return self.name
        if isinstance(self.param, float):
            return f"{self.name}({self.param:g})"
        return f"{self.name}({self.param})"


_METHOD_RE = re.compile(r"^\s*([A-Za-z]+)\s*(?:\(\s*([^()]*?)\s*\))?\s*$")


def parse_method(text: str) -> Method:
    m = _METHOD_RE.match(text)
    if not m or m.group(1) not in METHODS:
        raise SpecError(f"unknown method {text.strip()!r}; expected one of {', '.join(METHODS)}")
    name, arg = m.group(1), m.group(2)
    if arg is None or arg == "":
        return Method(name)
    if name == "Tradeoff":
        try:
            rho = float(arg)
        except ValueError:
            raise SpecError(f"Tradeoff weight must be a number, got {arg!r}") from None
        if not 0.0 <= rho <= 1.0:
            raise SpecError(f"Tradeoff weight must lie in [0, 1], got {rho!r}")
        return Method(name, rho)
    if name == "CmBnb":
        rule = arg.upper()
        if rule not in ("ARS", "BRS"):
            raise SpecError(f"CmBnb rule must be ARS or BRS, got {arg!r}")
        return Method(name, rule)
    raise SpecError(f"method {name} takes no argument")


@dataclass(frozen=True)
class ExperimentSpec:
    scenario: str
    cfg: SystemConfig
    seeds: tuple
    sweep: tuple
    methods: tuple
    snr_db: float = 10.0
    rho: float = 0.1
    reference: str = "omni"
    epsilon: float = 1.0
    delta: float = 1e-5
    max_iters: int = 10_000
    targets_deg: tuple = (-60.0, 0.0, 60.0)
    mainlobe_width_deg: float = 10.0
    grid_points: int = 181
    fixed_channel: str = "none"
    column: int = 0
    antenna: int = 0
    window_nbar: int = 4
    window_sll_db: float = -30.0
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise SpecError(f"unknown scenario {self.scenario!r}", key="scenario")
        if not self.seeds:
            raise SpecError("seeds must not be empty", key="seeds")
        if not self.sweep:
            raise SpecError("sweep must not be empty", key="sweep")
        if not self.methods:
            raise SpecError("methods must not be empty", key="methods")
        allowed = _SCENARIO_METHODS[self.scenario]
        for method in self.methods:
            if method.name not in allowed:
                raise SpecError(
                    f"method {method} is not available for scenario {self.scenario}", key="methods"
                )

    def echo(self) -> dict:
        """JSON-friendly view of the spec for the run manifest."""
        cfg = self.cfg
        return {
            "scenario": self.scenario,
            "n_antennas": cfg.n_antennas,
            "n_users": cfg.n_users,
            "frame_len": cfg.frame_len,
            "total_power": cfg.total_power,
            "element_spacing": cfg.element_spacing,
            "seeds": list(self.seeds),
            "sweep": list(self.sweep),
            "methods": [str(m) for m in self.methods],
            "snr_db": self.snr_db,
            "rho": self.rho,
            "reference": self.reference,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "max_iters": self.max_iters,
            "targets_deg": list(self.targets_deg),
            "mainlobe_width_deg": self.mainlobe_width_deg,
            "grid_points": self.grid_points,
            "fixed_channel": self.fixed_channel,
            "column": self.column,
            "antenna": self.antenna,
            "window_nbar": self.window_nbar,
            "window_sll_db": self.window_sll_db,
        }


def _floats(text: str) -> tuple:
    """Comma list of numbers; ``a:b:step`` expands to an inclusive range."""
    values = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            pieces = [float(v) for v in part.split(":")]
            if len(pieces) != 3 or pieces[2] <= 0:
                raise ValueError(f"range must be start:stop:step with step > 0, got {part!r}")
            start, stop, step = pieces
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            values.extend(float(v) for v in start + step * np.arange(count))
        else:
            values.append(float(part))
    return tuple(values)


def _seeds(text: str) -> tuple:
    """Comma list of seeds; ``a:b`` is the half-open range ``a..b-1``."""
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            lo, hi = (int(v) for v in part.split(":"))
            seeds.extend(range(lo, hi))
        else:
            seeds.append(int(part))
    for seed in seeds:
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed {seed} is not a 64-bit unsigned integer")
    return tuple(seeds)


def _positive_int(v):
    value = int(v)
    if value < 1:
        raise ValueError("must be a positive integer")
    return value


def _nonneg_int(v):
    value = int(v)
    if value < 0:
        raise ValueError("must be a non-negative integer")
    return value


def _positive_float(v):
    value = float(v)
    if not value > 0:
        raise ValueError("must be > 0")
    return value


def _unit_float(v):
    value = float(v)
    if not 0.0 <= value <= 1.0:
        raise ValueError("must lie in [0, 1]")
    return value


def _epsilon(v):
    value = float(v)
    if not 0.0 <= value <= 2.0:
        raise ValueError("must lie in [0, 2]")
    return value


def _choice(*options):
    def convert(v):
        if v not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return v

    return convert


def _negative_float(v):
    value = float(v)
    if not value < 0:
        raise ValueError("must be negative")
    return value


_CFG_KEYS = {
    "n_antennas": _positive_int,
    "n_users": _positive_int,
    "frame_len": _positive_int,
    "total_power": _positive_float,
    "element_spacing": _positive_float,
}

_SPEC_KEYS = {
    "snr_db": float,
    "rho": _unit_float,
    "reference": _choice("omni", "directional"),
    "epsilon": _epsilon,
    "delta": _positive_float,
    "max_iters": _positive_int,
    "targets_deg": _floats,
    "mainlobe_width_deg": _positive_float,
    "grid_points": _positive_int,
    "fixed_channel": _choice("none", "identity"),
    "column": _nonneg_int,
    "antenna": _nonneg_int,
    "window_nbar": _positive_int,
    "window_sll_db": _negative_float,
}

_KNOWN_KEYS = {"scenario", "seeds", "sweep", "methods"} | set(_CFG_KEYS) | set(_SPEC_KEYS)


def parse_spec_text(text: str, scenario: str | None = None) -> ExperimentSpec:
    """Parse spec file contents; see :func:`parse_spec`."""
    raw = {}
    lines = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise SpecError(f"expected 'key = value', got {content!r}", line=lineno)
        key, value = (part.strip() for part in content.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise SpecError(f"unknown key {key!r}", line=lineno, key=key)
        if key in raw:
            raise SpecError(f"duplicate key {key!r}", line=lineno, key=key)
        raw[key] = value
        lines[key] = lineno

    if scenario is not None:
        raw["scenario"] = scenario
        lines.setdefault("scenario", None)
    if "scenario" not in raw:
        raise SpecError("missing required key 'scenario'", key="scenario")
    scenario = raw["scenario"]
    if scenario not in SCENARIOS:
        raise SpecError(
            f"scenario must be one of {', '.join(SCENARIOS)}, got {scenario!r}",
            line=lines["scenario"],
            key="scenario",
        )

    def convert(key, fn):
        try:
            return fn(raw[key])
        except (ValueError, SpecError) as exc:
            raise SpecError(f"invalid {key}: {exc}", line=lines[key], key=key) from None

    cfg_args = {key: convert(key, fn) for key, fn in _CFG_KEYS.items() if key in raw}
    kwargs = dict(_DEFAULT_OPTIONS.get(scenario, {}))
    kwargs.update({key: convert(key, fn) for key, fn in _SPEC_KEYS.items() if key in raw})
    snr_db = kwargs.get("snr_db", 10.0)
    try:
        cfg = SystemConfig(
            noise_power=cfg_args.get("total_power", 1.0) / 10.0 ** (snr_db / 10.0), **cfg_args
        )
    except ValueError as exc:
        raise SpecError(str(exc)) from None

    seeds_text = raw.get("seeds", _DEFAULT_SEEDS.get(scenario, "0:100"))
    sweep_text = raw.get("sweep", _DEFAULT_SWEEP[scenario])
    methods_text = raw.get("methods", _DEFAULT_METHODS[scenario])
    try:
        seeds = _seeds(seeds_text)
    except ValueError as exc:
        raise SpecError(f"invalid seeds: {exc}", line=lines.get("seeds"), key="seeds") from None
    try:
        sweep = _floats(sweep_text)
    except ValueError as exc:
        raise SpecError(f"invalid sweep: {exc}", line=lines.get("sweep"), key="sweep") from None
    try:
        methods = tuple(parse_method(m) for m in methods_text.split(",") if m.strip())
    except SpecError as exc:
        raise SpecError(str(exc), line=lines.get("methods"), key="methods") from None

    if scenario == "tradeoff_sweep" and any(not 0 <= v <= 1 for v in sweep):
        raise SpecError("tradeoff_sweep values must lie in [0, 1]", line=lines.get("sweep"), key="sweep")
    if scenario in ("bnb_trace", "sumrate_vs_epsilon", "pulse_compression") and any(
        not 0 <= v <= 2 for v in sweep
    ):
        raise SpecError("epsilon sweep values must lie in [0, 2]", line=lines.get("sweep"), key="sweep")
    if kwargs.get("column", 0) >= cfg.frame_len:
        raise SpecError("column must be < frame_len", line=lines.get("column"), key="column")
    if kwargs.get("antenna", 0) >= cfg.n_antennas:
        raise SpecError("antenna must be < n_antennas", line=lines.get("antenna"), key="antenna")
    if kwargs.get("fixed_channel") == "identity" and cfg.n_users != cfg.n_antennas:
        raise SpecError(
            "fixed_channel = identity needs n_users == n_antennas",
            line=lines.get("fixed_channel"),
            key="fixed_channel",
        )
    try:
        return ExperimentSpec(scenario, cfg, seeds, sweep, methods, **kwargs)
    except SpecError as exc:
        raise SpecError(str(exc), line=lines.get(exc.key) if exc.key else None, key=exc.key) from None


def parse_spec(path, scenario: str | None = None) -> ExperimentSpec:
    """Read an experiment spec file.

    Every key other than ``scenario`` is optional; unknown keys, malformed lines
    and out-of-range values raise :class:`SpecError` naming the line and key.
    ``scenario`` overrides the file's scenario, and scenario-dependent defaults
    follow the override.
    """
    return parse_spec_text(Path(path).read_text(encoding="utf-8"), scenario)
