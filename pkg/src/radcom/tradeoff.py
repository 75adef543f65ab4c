"""Weighted radar/communication trade-off solved as a matrix trust-region subproblem.

The problem

    min_X  rho ||HX - S||_F^2 + (1 - rho) ||X - X0||_F^2   s.t.  ||X||_F^2 = L P_T

is rewritten as ``min tr(X^H Q X) - 2 Re tr(X^H G)`` on the sphere, with
``Q = rho H^H H + (1 - rho) I`` and ``G = rho H^H S + (1 - rho) X0``. Strong
duality reduces it to a scalar search for the multiplier ``lambda`` solving
``P(lambda) = ||(Q + lambda I)^{-1} G||_F^2 = L P_T`` on ``lambda >= -lambda_min``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import NumericalFailure
from .model import SystemConfig

__all__ = [
    "TradeoffProblem",
    "TrsSolution",
    "EigenCache",
    "assemble_stacked",
    "secular_value",
    "solve_tradeoff",
    "tradeoff_objective",
    "lagrangian",
]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class TradeoffProblem:
    h: np.ndarray
    s: np.ndarray
    x0: np.ndarray
    rho: float
    cfg: SystemConfig

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [0, 1], got {self.rho!r}")
        energy = np.linalg.norm(self.x0) ** 2
        target = self.target_energy
        if abs(energy - target) > 1e-6 * max(1.0, target):
            raise ValueError(
                f"reference waveform energy {energy:.9g} differs from L*P_T = {target:.9g}"
            )

    @property
    def target_energy(self) -> float:
        return self.s.shape[1] * self.cfg.total_power


@dataclass
class TrsSolution:
    x_opt: np.ndarray
    lambda_opt: float
    kkt_residual: float
    objective: float
    hard_case: bool = False
    iterations: int = 0


@dataclass(frozen=True)
class EigenCache:
    """Eigen-decomposition ``Q = V diag(w) V^H`` and the rotated target ``V^H G``."""

    w: np.ndarray
    v: np.ndarray
    c: np.ndarray

    @classmethod
    def from_qg(cls, q: np.ndarray, g: np.ndarray) -> "EigenCache":
        w, v = np.linalg.eigh(q)
        return cls(w, v, v.conj().T @ g)

    @property
    def weights(self) -> np.ndarray:
        """Row energies ``sum_j |[V^H G]_ij|^2``."""
        return np.sum(np.abs(self.c) ** 2, axis=1)


def assemble_stacked(p: TradeoffProblem) -> tuple[np.ndarray, np.ndarray]:
    """``Q = A^H A`` and ``G = A^H B`` for the stacked least-squares form."""
    n = p.h.shape[1]
    hh = p.h.conj().T
    q = p.rho * (hh @ p.h) + (1.0 - p.rho) * np.eye(n)
    g = p.rho * (hh @ p.s) + (1.0 - p.rho) * p.x0
    return 0.5 * (q + q.conj().T), g


def _secular(lam: float, w: np.ndarray, weights: np.ndarray) -> float:
    denom = lam + w
    active = weights > 0
    if np.any(denom[active] == 0):
        return math.inf
    return float(np.sum(weights[active] / denom[active] ** 2))


def secular_value(lam: float, eig: EigenCache) -> float:
    """``P(lambda) = sum_ij |[V^H G]_ij|^2 / (lambda + lambda_i)^2``.

    Returns ``inf`` at a pole, i.e. when ``lambda = -lambda_i`` for an eigenvalue
    whose row of ``V^H G`` is non-zero.
    """
    return _secular(lam, eig.w, eig.weights)


def tradeoff_objective(p: TradeoffProblem, x: np.ndarray) -> float:
    return float(
        p.rho * np.linalg.norm(p.h @ x - p.s) ** 2 + (1.0 - p.rho) * np.linalg.norm(x - p.x0) ** 2
    )


def lagrangian(p: TradeoffProblem, x: np.ndarray, lam: float) -> float:
    """Lagrangian of the quadratic form plus the constant ``||B||_F^2``."""
    q, g = assemble_stacked(p)
    const = p.rho * np.linalg.norm(p.s) ** 2 + (1.0 - p.rho) * np.linalg.norm(p.x0) ** 2
    quad = np.real(np.vdot(x, q @ x)) - 2.0 * np.real(np.vdot(x, g))
    return float(quad + const + lam * (np.linalg.norm(x) ** 2 - p.target_energy))


def _golden_root(fun, lo, hi, target, tol, max_iters):
    """Golden-section search on ``(fun - target)^2`` over ``[lo, hi]``."""
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc = (fun(c) - target) ** 2
    fd = (fun(d) - target) ** 2
    it = 0
    while b - a > tol * max(1.0, abs(a), abs(b)) and it < max_iters:
        it += 1
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = (fun(c) - target) ** 2
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = (fun(d) - target) ** 2
    return a, b, it


def solve_tradeoff(
    p: TradeoffProblem,
    tol: float = 1e-10,
    max_iters: int = 200,
    rtol_power: float = 1e-8,
) -> TrsSolution:
    """Global minimizer of the weighted trade-off problem.

    A golden-section search on ``(P(lambda) - L P_T)^2`` brackets the multiplier;
    bisection on the monotone ``P`` then polishes it until the power residual is
    below ``rtol_power * L P_T``. The hard case (``G`` orthogonal to the bottom
    eigenspace of ``Q`` and ``P(-lambda_min) < L P_T``) is resolved by adding a
    bottom-eigenspace component and is flagged on the result.
    """
    q, g = assemble_stacked(p)
    eig = EigenCache.from_qg(q, g)
    w, v = eig.w, eig.v
    weights = eig.weights.copy()
    target = p.target_energy
    lam_min = float(w[0])
    scale = max(1.0, float(np.max(np.abs(w))))
    bottom = w <= lam_min + 1e-10 * scale
    # rows of V^H G that are numerically zero must not create spurious poles
    weights[weights <= (1e-14 * max(1.0, float(weights.sum())))] = 0.0
    gnorm = math.sqrt(float(weights.sum()))

    if gnorm == 0.0:
        # only the bottom eigenspace matters; any unit-energy vector in it is optimal
        return _hard_case_solution(p, q, g, eig, bottom, lam_min, np.zeros_like(g), 0)

    if np.all(weights[bottom] == 0.0):
        rest = ~bottom
        p_edge = _secular(-lam_min, w[rest], weights[rest]) if np.any(rest) else 0.0
        if p_edge <= target:
            shift = w[rest] - lam_min
            x_part = v[:, rest] @ (eig.c[rest] / shift[:, None])
            return _hard_case_solution(p, q, g, eig, bottom, lam_min, x_part, 0)

    def pfun(lam):
        return _secular(lam, w, weights)

    lo = -lam_min
    hi = gnorm / math.sqrt(target) + float(w[-1])
    hi = max(hi, lo + 1.0)
    while pfun(hi) > target:
        hi = lo + 2.0 * (hi - lo)

    a, b, iters = _golden_root(pfun, lo, hi, target, tol, max_iters)
    lam = 0.5 * (a + b)
    # safeguarded bisection on the monotone secular function
    left, right = lo, hi
    if pfun(a) >= target:
        left = a
    if pfun(b) <= target:
        right = b
    while abs(pfun(lam) - target) > rtol_power * target:
        iters += 1
        if iters > max_iters:
            raise NumericalFailure(
                f"multiplier search did not converge: |P - L P_T| = {abs(pfun(lam) - target):.3e}"
            )
        if pfun(lam) > target:
            left = lam
        else:
            right = lam
        lam = 0.5 * (left + right)
        if right - left <= 4 * np.finfo(float).eps * max(1.0, abs(lam)):
            break

    x = v @ (eig.c / (w + lam)[:, None])
    return _finish(p, q, g, x, lam, hard_case=False, iterations=iters)


def _hard_case_solution(p, q, g, eig, bottom, lam_min, x_part, iters):
    remaining = p.target_energy - np.linalg.norm(x_part) ** 2
    l = g.shape[1]
    direction = eig.v[:, np.nonzero(bottom)[0][0]]
    x = x_part + np.sqrt(max(remaining, 0.0) / l) * np.outer(direction, np.ones(l))
    return _finish(p, q, g, x, -lam_min, hard_case=True, iterations=iters)


def _finish(p, q, g, x, lam, hard_case, iterations):
    kkt = float(np.linalg.norm(q @ x + lam * x - g))
    return TrsSolution(
        x_opt=x,
        lambda_opt=float(lam),
        kkt_residual=kkt,
        objective=tradeoff_objective(p, x),
        hard_case=hard_case,
        iterations=iterations,
    )
