"""Seeded Monte-Carlo runs of the waveform designs, emitted as long-format CSV rows."""
from __future__ import annotations

import csv
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import NamedTuple, TextIO

import numpy as np

from ..bnb import ARS, BnbConfig, bnb_solve_column, column_problem, gp_lower_bound, solve_block
from ..closed_form import (
    DirectionalTarget,
    design_covariance_ls,
    directional_design,
    omni_design,
    regularize_covariance,
)
from ..model import (
    SystemConfig,
    beampattern,
    generate_qpsk_symbols,
    generate_rayleigh_channel,
    mui_energy,
    per_user_sinr,
    sample_covariance,
    sum_rate,
    zf_precode,
)
from ..radar_tools import WindowSpec, chirp_reference, peak_sidelobe_db, pulse_compress, sidelobe_energy
from ..tradeoff import TradeoffProblem, solve_tradeoff
from .spec import ExperimentSpec, Method

__all__ = ["CSV_HEADER", "ResultRow", "RunSummary", "run_experiment", "write_csv", "format_value"]

CSV_HEADER = ("scenario", "method", "seed", "sweep", "metric", "value")


class ResultRow(NamedTuple):
    scenario: str
    method: str
    seed: int
    sweep_value: float
    metric_name: str
    metric_value: float


@dataclass
class RunSummary:
    rows: list
    failures: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def n_failures(self) -> int:
        return len(self.failures)


def format_value(value: float) -> str:
    """Twelve significant digits; integers stay integral."""
    return format(float(value), ".12g")


def write_csv(rows, out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow(
            (r.scenario, r.method, r.seed, format_value(r.sweep_value), r.metric_name, format_value(r.metric_value))
        )


class _Context:
    """Per-spec quantities shared by every seed and sweep point."""

    def __init__(self, spec: ExperimentSpec):
        self.spec = spec
        self.cfg = spec.cfg
        self.angles = np.deg2rad(np.linspace(-90.0, 90.0, spec.grid_points))
        self._covariances = {}
        self._lock = threading.Lock()

    def design_covariance(self, method: Method, seed: int, h, s, cfg) -> np.ndarray:
        """Sample covariance of a closed-form design, computed once per seed."""
        key = (str(method), seed)
        with self._lock:
            r = self._covariances.get(key)
        if r is None:
            if method.name == "Desired":
                r = self.rd
            else:
                r = sample_covariance(_closed_form(self, method, h, s, cfg))
            with self._lock:
                self._covariances[key] = r
        return r

    @cached_property
    def target(self) -> DirectionalTarget:
        return DirectionalTarget(
            angles=tuple(np.deg2rad(self.spec.targets_deg)),
            mainlobe_width=np.deg2rad(self.spec.mainlobe_width_deg),
            grid=self.angles,
        )

    @cached_property
    def rd(self) -> np.ndarray:
        """Positive-definite radar covariance fitted to the target template."""
        return regularize_covariance(design_covariance_ls(self.target, self.cfg).covariance, self.cfg)

    @cached_property
    def x_chirp(self) -> np.ndarray:
        return chirp_reference(self.cfg)

    def reference_cov(self) -> np.ndarray:
        if self.spec.reference == "omni":
            return self.cfg.element_power * np.eye(self.cfg.n_antennas)
        return self.rd

    def pattern_mse(self, x: np.ndarray, r_ref: np.ndarray, cfg: SystemConfig) -> float:
        designed = beampattern(sample_covariance(x), cfg, self.angles)
        desired = beampattern(r_ref, cfg, self.angles)
        return float(np.mean((designed - desired) ** 2))


def _channel(spec: ExperimentSpec, cfg: SystemConfig, seed: int) -> np.ndarray:
    if spec.fixed_channel == "identity":
        return np.eye(cfg.n_users, cfg.n_antennas, dtype=complex)
    return generate_rayleigh_channel(cfg, seed)


def _comm_metrics(h, x, s, cfg) -> list:
    return [
        ("sum_rate", sum_rate(per_user_sinr(h, x, s, cfg))),
        ("mui_energy", mui_energy(h, x, s)),
    ]


def _awgn_rate(cfg: SystemConfig) -> float:
    """Zero-MUI sum rate ``K log2(1 + 1/N0)`` for unit-power symbols."""
    return float(cfg.n_users * np.log2(1.0 + 1.0 / cfg.noise_power)) if cfg.noise_power > 0 else np.inf


def _reference_design(ctx: _Context, h, s, cfg) -> np.ndarray:
    """Strict design the trade-off is anchored to."""
    if ctx.spec.reference == "omni":
        return omni_design(h, s, cfg)
    return directional_design(h, s, ctx.rd, cfg)


def _closed_form(ctx: _Context, method: Method, h, s, cfg, rho_override=None):
    """Design of one of the closed-form or trade-off methods."""
    if method.name == "ZF":
        return zf_precode(h, s, cfg)
    if method.name == "OmniStrict":
        return omni_design(h, s, cfg)
    if method.name == "DirectionalStrict":
        return directional_design(h, s, ctx.rd, cfg)
    if method.name == "Tradeoff":
        rho = rho_override if rho_override is not None else method.param
        rho = ctx.spec.rho if rho is None else rho
        x0 = _reference_design(ctx, h, s, cfg)
        return solve_tradeoff(TradeoffProblem(h, s, x0, float(rho), cfg)).x_opt
    raise ValueError(f"method {method} has no closed-form design")


def _bnb_config(spec: ExperimentSpec, method: Method) -> BnbConfig:
    rule = method.param if isinstance(method.param, str) else ARS
    return BnbConfig(delta=spec.delta, max_iters=spec.max_iters, rule=rule)


def _eta(cfg: SystemConfig, epsilon: float) -> float:
    return float(epsilon) * np.sqrt(cfg.element_power)


def _run_method(ctx: _Context, method: Method, seed: int, value: float) -> list:
    spec = ctx.spec
    scenario = spec.scenario
    cfg = ctx.cfg.with_snr_db(value) if scenario == "sumrate_vs_snr" else ctx.cfg
    h = _channel(spec, cfg, seed)
    s = generate_qpsk_symbols(cfg, seed)

    if method.name == "Awgn":
        return [("sum_rate", _awgn_rate(cfg))]

    if scenario == "sumrate_vs_snr":
        if method.name == "CmBnb":
            x = solve_block(h, s, ctx.x_chirp, _eta(cfg, spec.epsilon), cfg, _bnb_config(spec, method))
        else:
            x = _closed_form(ctx, method, h, s, cfg)
        return _comm_metrics(h, x, s, cfg)

    if scenario == "tradeoff_sweep":
        x = _closed_form(ctx, method, h, s, cfg, rho_override=value)
        x0 = _reference_design(ctx, h, s, cfg)
        theta = np.deg2rad(np.asarray(spec.targets_deg)) if spec.targets_deg else np.zeros(1)
        peak = beampattern(sample_covariance(x), cfg, theta)
        return _comm_metrics(h, x, s, cfg) + [
            ("beampattern_mse", ctx.pattern_mse(x, ctx.reference_cov(), cfg)),
            ("target_power", float(np.mean(peak))),
            ("distance", float(np.linalg.norm(x - x0) ** 2)),
        ]

    if scenario == "beampattern_dump":
        r = ctx.design_covariance(method, seed, h, s, cfg)
        theta = np.deg2rad(value)
        return [("beampattern", float(beampattern(r, cfg, [theta])[0]))]

    if scenario == "bnb_trace":
        j = spec.column
        problem = column_problem(h, s[:, j], ctx.x_chirp[:, j], _eta(cfg, value), cfg)
        result = bnb_solve_column(problem, _bnb_config(spec, method))
        rows = [
            ("iterations", result.iterations),
            ("gap", result.gap),
            ("converged", float(result.converged)),
            ("objective", result.objective),
        ]
        for entry in result.trace:
            rows.append((f"upper[{entry.iteration}]", entry.upper))
            rows.append((f"lower[{entry.iteration}]", entry.lower))
        return rows

    if scenario == "sumrate_vs_epsilon":
        eta = _eta(cfg, value)
        if method.name == "QpLb":
            # relaxation bound on the MUI, spread evenly over users
            lb = 0.0
            for j in range(cfg.frame_len):
                problem = column_problem(h, s[:, j], ctx.x_chirp[:, j], eta, cfg)
                lb += gp_lower_bound(problem, problem.root_box).value
            per_user = lb / (cfg.n_users * cfg.frame_len)
            rate = cfg.n_users * np.log2(1.0 + 1.0 / (per_user + cfg.noise_power))
            return [("sum_rate", float(rate)), ("mui_energy", lb)]
        x, results = solve_block(h, s, ctx.x_chirp, eta, cfg, _bnb_config(spec, method), return_results=True)
        return _comm_metrics(h, x, s, cfg) + [
            ("iterations_mean", float(np.mean([r.iterations for r in results]))),
            ("converged", float(all(r.converged for r in results))),
        ]

    if scenario == "pulse_compression":
        x = solve_block(h, s, ctx.x_chirp, _eta(cfg, value), cfg, _bnb_config(spec, method))
        row = x[spec.antenna]
        window = WindowSpec(nbar=spec.window_nbar, sll_db=spec.window_sll_db)
        profile = pulse_compress(row, row, window)
        rows = [
            ("peak_bin", profile.peak_bin),
            ("sidelobe_energy", sidelobe_energy(profile)),
            ("peak_sidelobe_db", peak_sidelobe_db(profile)),
        ]
        rows += [(f"profile_db[{b}]", v) for b, v in zip(profile.delay_bins, profile.magnitude_db)]
        return rows

    raise ValueError(f"unknown scenario {scenario!r}")


def _run_point(ctx: _Context, seed: int, value: float):
    rows, failures = [], []
    for method in sorted(ctx.spec.methods, key=str):
        name = str(method)
        try:
            metrics = _run_method(ctx, method, seed, value)
        except Exception as exc:  # a failed run becomes an error row
            failures.append({"method": name, "seed": seed, "sweep": value, "error": f"{type(exc).__name__}: {exc}"})
            metrics = [("error", 1.0)]
        rows.extend(ResultRow(ctx.spec.scenario, name, seed, value, m, float(v)) for m, v in metrics)
    return rows, failures


def run_experiment(spec: ExperimentSpec, out: TextIO | None = None, threads: int = 1) -> RunSummary:
    """Run every (seed, sweep point, method) of ``spec``.

    Work items are independent and may run on ``threads`` worker threads; the
    rows are merged seed-major, sweep-minor with methods in lexicographic
    order, so the output does not depend on scheduling. Per-run exceptions are
    recorded as ``error`` rows and listed in the summary. When ``out`` is given
    the rows are written to it as CSV.
    """
    start = time.perf_counter()
    ctx = _Context(spec)
    names = {m.name for m in spec.methods}
    if names & {"DirectionalStrict", "Desired"} or ("Tradeoff" in names and spec.reference == "directional"):
        # build the shared covariance once, before fanning out
        ctx.rd  # noqa: B018
    grid = [(seed, value) for seed in spec.seeds for value in spec.sweep]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda item: _run_point(ctx, *item), grid))
    else:
        parts = [_run_point(ctx, *item) for item in grid]
    rows, failures = [], []
    for r, f in parts:
        rows.extend(r)
        failures.extend(f)
    summary = RunSummary(rows, failures, time.perf_counter() - start)
    if out is not None:
        write_csv(rows, out)
    return summary


def with_first_seed(spec: ExperimentSpec, seed: int) -> ExperimentSpec:
    """Copy of ``spec`` whose first seed is replaced by ``seed``."""
    return replace(spec, seeds=(int(seed),) + tuple(spec.seeds[1:]))
