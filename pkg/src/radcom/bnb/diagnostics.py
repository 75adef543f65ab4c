"""Gap-closure thresholds and the worst-case BRS iteration count."""
from __future__ import annotations

import math

import numpy as np

from .bounds import CmProblem

__all__ = ["convergence_diagnostics", "gradient_bound"]


def gradient_bound(p: CmProblem) -> float:
    """``N lambda_max + sqrt(N) ||H~^H s||``, the constant shared by both thresholds."""
    return p.n * p.lambda_max + math.sqrt(p.n) * float(np.linalg.norm(p.hs))


def convergence_diagnostics(p: CmProblem, delta: float):
    """Return ``(eta1, eta2, worst_case_iters)`` for gap tolerance ``delta``.

    ``eta1`` bounds the largest arc width and ``eta2`` the largest entry gap
    ``|x_u(n) - x_l(n)|`` below which ``UB - LB <= delta`` is guaranteed.
    ``worst_case_iters`` is ``ceil(2^(N+1) arccos^N(1 - eps^2/2) / eta1)``, or
    ``math.inf`` when it does not fit in a float.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    c = gradient_bound(p)
    if c == 0:
        eta1, eta2 = math.pi, math.inf
    else:
        ratio = delta / (4.0 * c)
        eta1 = math.pi if ratio >= 1.0 else min(math.pi, 2.0 * math.asin(ratio))
        eta2 = delta / (2.0 * c)
    half = math.acos(max(-1.0, min(1.0, 1.0 - p.epsilon**2 / 2.0)))
    if half == 0.0:
        return eta1, eta2, 0
    try:
        t = 2.0 ** (p.n + 1) * half**p.n / eta1
    except OverflowError:
        return eta1, eta2, math.inf
    if not math.isfinite(t):
        return eta1, eta2, math.inf
    return eta1, eta2, math.ceil(t)
