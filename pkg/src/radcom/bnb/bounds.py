"""Per-column constant-modulus problem and its lower/upper bounding solvers.

For one column the problem is ``min_x ||H~ x - s||^2`` with ``|x(n)| = 1`` and
``arg x(n)`` on an arc. The lower bound relaxes each arc to its convex hull and
runs accelerated projected gradient; the upper bound runs plain projected
gradient directly on the arcs.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .arcs import ArcBox, arc_bounds, arc_projector, hull_projector, project_arc_cw

__all__ = ["CmProblem", "GpConfig", "BoundResult", "gp_lower_bound", "gp_upper_bound"]


@dataclass(frozen=True, eq=False)
class CmProblem:
    """One column of the constant-modulus design, in normalized units.

    ``h_tilde`` is the channel scaled by ``sqrt(P_T / N)``, ``x0`` the unit-modulus
    reference column and ``epsilon`` the similarity tolerance, ``0 <= epsilon <= 2``.
    """

    h_tilde: np.ndarray
    s: np.ndarray
    x0: np.ndarray
    epsilon: float

    def __post_init__(self):
        if np.any(np.abs(np.abs(self.x0) - 1.0) > 1e-12):
            raise ValueError("reference column must have unit-modulus entries")
        if not 0.0 <= self.epsilon <= 2.0:
            raise ValueError(f"epsilon must lie in [0, 2], got {self.epsilon!r}")
        if self.h_tilde.shape != (self.s.size, self.x0.size):
            raise ValueError(
                f"h_tilde shape {self.h_tilde.shape} does not match s ({self.s.size}) "
                f"and x0 ({self.x0.size})"
            )

    @property
    def n(self) -> int:
        return self.x0.size

    @cached_property
    def gram(self) -> np.ndarray:
        return self.h_tilde.conj().T @ self.h_tilde

    @cached_property
    def hs(self) -> np.ndarray:
        return self.h_tilde.conj().T @ self.s

    @cached_property
    def lambda_max(self) -> float:
        """Largest eigenvalue of ``H~^H H~``."""
        return float(np.linalg.eigvalsh(self.gram)[-1])

    @cached_property
    def root_box(self) -> ArcBox:
        return arc_bounds(self.x0, self.epsilon)

    def objective(self, x) -> float:
        r = self.h_tilde @ x - self.s
        return float(np.real(np.vdot(r, r)))

    def gradient(self, x) -> np.ndarray:
        return 2.0 * (self.gram @ x - self.hs)


@dataclass(frozen=True)
class GpConfig:
    """Gradient-projection settings.

    ``step`` multiplies ``2 H~^H (H~ v - s)``; ``None`` selects ``1/(2 lambda_max)``,
    the inverse Lipschitz constant of the gradient of ``||H~ x - s||^2``.
    ``gap_tol`` stops the lower-bound solver once its duality certificate is
    this tight; ``None`` means ``1e-7``, or ``delta / 100`` inside branch and bound.
    """

    step: float | None = None
    max_iters: int = 2000
    fixed_point_tol: float = 1e-12
    gap_tol: float | None = None
    check_every: int = 5

    def __post_init__(self):
        if self.step is not None and not self.step > 0:
            raise ValueError("step must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")

    def step_for(self, p: CmProblem) -> float:
        if self.step is not None:
            return self.step
        lam = p.lambda_max
        return 0.5 / lam if lam > 0 else 1.0


@dataclass
class BoundResult:
    x: np.ndarray
    value: float
    objective: float
    iterations: int
    converged: bool
    gap: float = 0.0


def _norm(v: np.ndarray) -> float:
    return float(np.sqrt(np.vdot(v, v).real))


def _hull_gap(p: CmProblem, box: ArcBox, x: np.ndarray, grad: np.ndarray) -> float:
    """Frank-Wolfe duality gap ``max_y Re<grad, x - y>`` over the hull of ``box``.

    A linear function is minimized over the hull at an arc point, the one closest
    in angle to ``-grad``.
    """
    y = project_arc_cw(-grad, box.center, box.half_width)
    return max(float(np.real(np.vdot(grad, x - y))), 0.0)


def gp_lower_bound(
    p: CmProblem,
    box: ArcBox,
    cfg: GpConfig = GpConfig(),
    warm: np.ndarray | None = None,
) -> BoundResult:
    """Lower bound of the node from the convex (circular-segment) relaxation.

    Runs the accelerated iteration ``v = x_k + (k-1)/(k+2) (x_k - x_{k-1})``,
    ``x_{k+1} = PR2(v - 2 s H~^H (H~ v - s))``. The returned ``value`` is the
    relaxed objective minus its Frank-Wolfe gap, which never exceeds the true
    relaxation minimum however early the iteration stops.
    """
    c, hw = box.center, box.half_width
    step = cfg.step_for(p)
    gap_tol = 1e-7 if cfg.gap_tol is None else cfg.gap_tol
    gram, hs = p.gram, p.hs
    project = hull_projector(c, hw)
    start = np.exp(1j * c) if warm is None else warm
    x = project(start)
    x_prev = x
    converged = False
    gap = np.inf
    k = 0
    for k in range(1, cfg.max_iters + 1):
        v = x + ((k - 1) / (k + 2)) * (x - x_prev)
        x_next = project(v - 2.0 * step * (gram @ v - hs))
        moved = _norm(x_next - x)
        x_prev, x = x, x_next
        if moved <= cfg.fixed_point_tol or k % cfg.check_every == 0:
            gap = _hull_gap(p, box, x, p.gradient(x))
            if gap <= gap_tol or moved <= cfg.fixed_point_tol:
                converged = True
                break
    else:
        gap = _hull_gap(p, box, x, p.gradient(x))
    obj = p.objective(x)
    return BoundResult(x, max(obj - gap, 0.0), obj, k, converged, gap)


def gp_upper_bound(
    p: CmProblem,
    box: ArcBox,
    init: np.ndarray,
    cfg: GpConfig = GpConfig(),
) -> BoundResult:
    """Feasible point of the node by projected gradient directly on the arcs.

    Starts at ``PR1(init)`` and uses the plain (non-interpolated) iteration with
    ``PR1``. With the default step every iteration is a descent step, so the
    result is never worse than the starting point. Stops at a fixed point, or
    once ``check_every`` steps improve the objective by less than
    ``1e-3 * gap_tol``.
    """
    c, hw = box.center, box.half_width
    step = cfg.step_for(p)
    gram, hs = p.gram, p.hs
    project = arc_projector(c, hw)
    x = project(init)
    best, best_val = x, p.objective(x)
    stall_tol = 1e-3 * (1e-7 if cfg.gap_tol is None else cfg.gap_tol)
    last_check = best_val
    converged = False
    k = 0
    for k in range(1, cfg.max_iters + 1):
        x_next = project(x - 2.0 * step * (gram @ x - hs))
        moved = _norm(x_next - x)
        x = x_next
        val = p.objective(x)
        if val < best_val:
            best, best_val = x, val
        if moved <= max(cfg.fixed_point_tol, 1e-10):
            converged = True
            break
        if k % cfg.check_every == 0:
            if last_check - best_val <= stall_tol:
                break
            last_check = best_val
    return BoundResult(best, best_val, best_val, k, converged)
