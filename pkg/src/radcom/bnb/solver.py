"""Best-first branch-and-bound over arc boxes, and the block-level driver."""
from __future__ import annotations

import heapq
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple

import numpy as np

from ..exceptions import DegenerateNodeError, NumericalFailure
from ..model import SystemConfig
from .arcs import ArcBox, project_hull_cw
from .bounds import CmProblem, GpConfig, gp_lower_bound, gp_upper_bound

__all__ = [
    "BRS",
    "ARS",
    "BnbConfig",
    "BnbNode",
    "BnbResult",
    "TraceEntry",
    "evaluate_node",
    "subdivide",
    "bnb_solve_column",
    "column_problem",
    "solve_block",
]

BRS = "BRS"
ARS = "ARS"


@dataclass(frozen=True)
class BnbConfig:
    """Branch-and-bound settings: gap tolerance ``delta``, iteration cap, subdivision rule."""

    delta: float = 1e-5
    max_iters: int = 10_000
    rule: str = ARS
    gp: GpConfig = field(default_factory=GpConfig)

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.rule not in (BRS, ARS):
            raise ValueError(f"rule must be {BRS!r} or {ARS!r}, got {self.rule!r}")


@dataclass
class BnbNode:
    box: ArcBox
    lower_bound: float
    upper_bound: float
    x_l: np.ndarray
    x_u: np.ndarray

    @property
    def phi_max(self) -> float:
        return float(np.max(self.box.widths))

    @property
    def d(self) -> np.ndarray:
        return np.abs(self.x_u - self.x_l)

    @property
    def d_max(self) -> float:
        return float(np.max(self.d))


class TraceEntry(NamedTuple):
    iteration: int
    upper: float
    lower: float
    active: int
    max_width: float


@dataclass
class BnbResult:
    x_opt: np.ndarray
    objective: float
    lower_bound: float
    trace: list
    converged: bool
    iterations: int

    @property
    def gap(self) -> float:
        return self.objective - self.lower_bound


def evaluate_node(
    p: CmProblem, box: ArcBox, gp: GpConfig, warm: np.ndarray | None = None, floor: float = 0.0
) -> BnbNode:
    """Bound a region: relaxed lower bound, then a feasible point started from it.

    ``floor`` is a lower bound known from an enclosing region; it is a valid bound
    here as well and keeps bounds monotone along a branch.
    """
    if warm is not None:
        warm = project_hull_cw(warm, box.center, box.half_width)
    lower = gp_lower_bound(p, box, gp, warm)
    upper = gp_upper_bound(p, box, lower.x, gp)
    lb = min(max(lower.value, floor), upper.value)
    return BnbNode(box, lb, upper.value, lower.x, upper.x)


def subdivide(node: BnbNode, rule: str = BRS) -> tuple[ArcBox, ArcBox]:
    """Split the node's box in two along one arc.

    BRS splits the widest arc; ARS the arc where the relaxed and feasible points
    differ most, falling back to the widest arc when they coincide. Ties go to
    the lowest index.
    """
    widths = node.box.widths
    if not np.any(widths > 0):
        raise DegenerateNodeError("every arc of the node has zero width")
    if rule == ARS:
        d = np.where(widths > 0, node.d, -1.0)
        index = int(np.argmax(d)) if np.max(d) > 0 else int(np.argmax(widths))
    elif rule == BRS:
        index = int(np.argmax(widths))
    else:
        raise ValueError(f"unknown subdivision rule {rule!r}")
    return node.box.split(index)


def bnb_solve_column(
    p: CmProblem,
    cfg: BnbConfig = BnbConfig(),
    sink: Callable[[TraceEntry], None] | None = None,
) -> BnbResult:
    """Globally minimize one column to within ``cfg.delta``.

    Nodes are kept in a heap keyed by lower bound (FIFO among equal bounds), the
    node with the smallest lower bound is always branched next, and children
    whose lower bound exceeds the incumbent are dropped. ``sink`` receives one
    :class:`TraceEntry` per iteration, starting with the root.
    """
    gp = cfg.gp if cfg.gp.gap_tol is not None else replace(cfg.gp, gap_tol=cfg.delta / 100.0)
    counter = itertools.count()
    root = evaluate_node(p, p.root_box, gp)
    incumbent, ub = root.x_u, root.upper_bound
    lb = root.lower_bound
    heap = [(root.lower_bound, next(counter), root)]
    trace = []

    def record(it):
        width = max((item[2].phi_max for item in heap), default=0.0)
        entry = TraceEntry(it, ub, lb, len(heap), width)
        trace.append(entry)
        if sink is not None:
            sink(entry)

    record(0)
    it = 0
    while ub - lb > cfg.delta and it < cfg.max_iters and heap:
        it += 1
        _, _, node = heapq.heappop(heap)
        try:
            children = subdivide(node, cfg.rule)
        except DegenerateNodeError:
            # a single point: its feasible value is already in the incumbent
            children = ()
        improved = False
        for box in children:
            child = evaluate_node(p, box, gp, warm=node.x_l, floor=node.lower_bound)
            if child.upper_bound < ub:
                incumbent, ub = child.x_u, child.upper_bound
                improved = True
            if child.lower_bound <= ub:
                heapq.heappush(heap, (child.lower_bound, next(counter), child))
        if improved:
            heap = [item for item in heap if item[0] <= ub]
            heapq.heapify(heap)
        frontier = heap[0][0] if heap else ub
        lb = max(lb, min(frontier, ub))
        record(it)
    return BnbResult(incumbent, ub, lb, trace, ub - lb <= cfg.delta, it)


def column_problem(
    h: np.ndarray, s_col: np.ndarray, x0_col: np.ndarray, eta: float, cfg: SystemConfig
) -> CmProblem:
    """Normalized per-column problem for a block with entry modulus ``sqrt(P_T/N)``."""
    amp = np.sqrt(cfg.element_power)
    eps = min(eta / amp, 2.0)
    x0n = x0_col / np.abs(x0_col)
    return CmProblem(amp * np.asarray(h), np.asarray(s_col), x0n, eps)


def solve_block(
    h: np.ndarray,
    s: np.ndarray,
    x0_block: np.ndarray,
    eta: float,
    cfg: SystemConfig,
    bnb: BnbConfig = BnbConfig(),
    threads: int = 1,
    return_results: bool = False,
):
    """Constant-modulus block with ``||vec(X - X0)||_inf <= eta`` and minimum MUI.

    The objective separates over columns, so each column is solved on its own
    (optionally on ``threads`` worker threads) and rescaled by ``sqrt(P_T/N)``.
    """
    amp = np.sqrt(cfg.element_power)
    x0_block = np.asarray(x0_block)
    if np.any(np.abs(np.abs(x0_block) - amp) > 1e-9):
        raise ValueError("reference block entries must have modulus sqrt(P_T/N)")
    if eta < 0:
        raise ValueError("eta must be non-negative")
    s = np.asarray(s)

    def run(j):
        try:
            return bnb_solve_column(column_problem(h, s[:, j], x0_block[:, j], eta, cfg), bnb)
        except Exception as exc:
            raise NumericalFailure(f"column {j}: {exc}") from exc

    cols = range(x0_block.shape[1])
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, cols))
    else:
        results = [run(j) for j in cols]
    x = amp * np.stack([r.x_opt for r in results], axis=1)
    if return_results:
        return x, results
    return x
