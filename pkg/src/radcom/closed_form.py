"""Closed-form minimum-MUI waveforms for a prescribed radar covariance.

Both designs reduce to an orthogonal Procrustes problem: with the feasible set
``(1/L) X X^H = R`` the term ``tr(H^H H X X^H)`` is constant, so minimizing
``||HX - S||_F^2`` is the same as maximizing ``Re tr(X^H H^H S)``, which the SVD
solves exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import NotPositiveDefiniteError
from .model import SystemConfig, check_hermitian, steering_matrix

__all__ = [
    "DirectionalTarget",
    "CovarianceDesign",
    "omni_design",
    "directional_design",
    "procrustes_factor",
    "regularize_covariance",
    "desired_pattern",
    "design_covariance_ls",
]


def procrustes_factor(m: np.ndarray) -> np.ndarray:
    """Row-orthonormal ``U I_{NxL} V^H`` maximizing ``Re tr(Y^H m)`` for N x L ``m``.

    The thin SVD gives ``V[:, :N]`` directly, which is all ``I_{NxL}`` keeps of the
    full ``V``.
    """
    n, l = m.shape
    if l < n:
        raise ValueError(f"frame length L={l} must be >= number of antennas N={n}")
    u, _, vh = np.linalg.svd(m, full_matrices=False)
    return u @ vh


def omni_design(h: np.ndarray, s: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    """Orthogonal waveform, ``(1/L) X X^H = (P_T/N) I``, with minimum MUI energy."""
    h = np.asarray(h)
    s = np.asarray(s)
    l = s.shape[1]
    if l < h.shape[1]:
        raise ValueError(f"frame length L={l} must be >= number of antennas N={h.shape[1]}")
    return np.sqrt(l * cfg.total_power / cfg.n_antennas) * procrustes_factor(h.conj().T @ s)


def _check_design_covariance(rd: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    rd = check_hermitian(rd)
    if rd.shape[0] != cfg.n_antennas:
        raise ValueError(f"covariance must be {cfg.n_antennas}x{cfg.n_antennas}, got {rd.shape}")
    trace = np.trace(rd).real
    if abs(trace - cfg.total_power) > 1e-8:
        raise ValueError(f"tr(R_d) = {trace!r} differs from P_T = {cfg.total_power!r}")
    return 0.5 * (rd + rd.conj().T)


def directional_design(
    h: np.ndarray, s: np.ndarray, rd: np.ndarray, cfg: SystemConfig
) -> np.ndarray:
    """Waveform with sample covariance exactly ``rd`` and minimum MUI energy.

    ``rd`` must be positive-definite with trace ``P_T``; see
    :func:`regularize_covariance` for semidefinite targets.
    """
    h = np.asarray(h)
    s = np.asarray(s)
    rd = _check_design_covariance(rd, cfg)
    if np.linalg.eigvalsh(rd)[0] <= 1e-10:
        raise NotPositiveDefiniteError("desired covariance is not positive-definite")
    try:
        f = np.linalg.cholesky(rd)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(str(exc)) from exc
    l = s.shape[1]
    return np.sqrt(l) * f @ procrustes_factor(f.conj().T @ h.conj().T @ s)


def regularize_covariance(r: np.ndarray, cfg: SystemConfig, rel_eps: float = 1e-8) -> np.ndarray:
    """Add ``eps I`` (``eps = rel_eps * P_T / N``) and rescale to trace ``P_T``."""
    r = check_hermitian(r)
    r = 0.5 * (r + r.conj().T) + rel_eps * cfg.element_power * np.eye(r.shape[0])
    return r * (cfg.total_power / np.trace(r).real)


@dataclass(frozen=True)
class DirectionalTarget:
    """Radar directions of interest and the angle grid used to fit the pattern.

    Angles are in radians; ``mainlobe_width`` is the full width of each
    rectangular mainlobe of the template.
    """

    angles: tuple = ()
    mainlobe_width: float = np.deg2rad(10.0)
    grid: np.ndarray = field(default_factory=lambda: np.linspace(-np.pi / 2, np.pi / 2, 181))

    def __post_init__(self):
        angles = np.asarray(self.angles, dtype=float)
        if np.any(np.abs(angles) >= np.pi / 2):
            raise ValueError("target angles must lie in (-pi/2, pi/2)")
        grid = np.asarray(self.grid, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be a strictly increasing vector")
        if not self.mainlobe_width > 0:
            raise ValueError("mainlobe_width must be positive")
        object.__setattr__(self, "angles", tuple(angles.tolist()))
        object.__setattr__(self, "grid", grid)

    @classmethod
    def three_targets(cls, **kwargs) -> "DirectionalTarget":
        return cls(angles=(-np.pi / 3, 0.0, np.pi / 3), **kwargs)


def desired_pattern(target: DirectionalTarget, cfg: SystemConfig) -> np.ndarray:
    """Rectangular template sampled on ``target.grid``.

    Inside a mainlobe the level is ``P_T`` divided by the fraction of ``sin(theta)``
    space the mainlobes cover, so the template carries the same average power as
    any covariance of trace ``P_T`` (capped at the coherent maximum ``N P_T``).
    With no angles the template is the flat omnidirectional level ``P_T``.
    """
    grid = target.grid
    if not target.angles:
        return np.full(grid.shape, cfg.total_power)
    half = target.mainlobe_width / 2
    inside = np.zeros(grid.shape, dtype=bool)
    covered = 0.0
    edges = []
    for angle in target.angles:
        lo = max(angle - half, -np.pi / 2)
        hi = min(angle + half, np.pi / 2)
        inside |= (grid >= lo) & (grid <= hi)
        edges.append((np.sin(lo), np.sin(hi)))
    # union of the mainlobe intervals in sin-space
    edges.sort()
    cur_lo, cur_hi = edges[0]
    for lo, hi in edges[1:]:
        if lo > cur_hi:
            covered += cur_hi - cur_lo
            cur_lo, cur_hi = lo, hi
        else:
            cur_hi = max(cur_hi, hi)
    covered += cur_hi - cur_lo
    level = min(cfg.total_power * 2.0 / covered, cfg.n_antennas * cfg.total_power)
    return np.where(inside, level, 0.0)


@dataclass
class CovarianceDesign:
    covariance: np.ndarray
    objective: float
    iterations: int
    converged: bool


def _project_trace_psd(r: np.ndarray, total_power: float) -> np.ndarray:
    """Euclidean projection onto ``{R >= 0, tr R = P_T}`` (eigenvalues onto a simplex)."""
    w, v = np.linalg.eigh(0.5 * (r + r.conj().T))
    mu = np.sort(w)[::-1]
    cumsum = np.cumsum(mu) - total_power
    k = np.nonzero(mu - cumsum / np.arange(1, mu.size + 1) > 0)[0][-1]
    w = np.maximum(w - cumsum[k] / (k + 1), 0.0)
    out = (v * w) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def design_covariance_ls(
    target: DirectionalTarget,
    cfg: SystemConfig,
    tol: float = 1e-6,
    max_iters: int = 10_000,
) -> CovarianceDesign:
    """Least-squares fit of a covariance to the rectangular template.

    Minimizes ``sum_g (a_g^H R a_g - P_des(theta_g))^2`` over Hermitian ``R >= 0``
    with ``tr R = P_T`` by accelerated projected gradient. Stops when the norm of
    the projected-gradient step (gradient mapping) falls below ``tol``; otherwise
    returns the best iterate with ``converged=False``.
    """
    a = steering_matrix(cfg, target.grid)
    p_des = desired_pattern(target, cfg)
    gram = np.abs(a.conj() @ a.T) ** 2
    lipschitz = 2.0 * np.linalg.eigvalsh(gram)[-1]
    step = 1.0 / lipschitz

    def residual(r):
        return np.einsum("gn,nm,gm->g", a.conj(), r, a).real - p_des

    def gradient(res):
        return 2.0 * (a.T * res) @ a.conj()

    r = np.eye(cfg.n_antennas, dtype=complex) * cfg.element_power
    y = r
    t = 1.0
    best, best_obj = r, float(np.sum(residual(r) ** 2))
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        res_y = residual(y)
        r_next = _project_trace_psd(y - step * gradient(res_y), cfg.total_power)
        mapping_norm = np.linalg.norm(r_next - y) / step
        obj = float(np.sum(residual(r_next) ** 2))
        if obj < best_obj:
            best, best_obj = r_next, obj
        if mapping_norm < tol:
            converged = True
            break
        t_next = (1 + np.sqrt(1 + 4 * t * t)) / 2
        y = r_next + ((t - 1) / t_next) * (r_next - r)
        if obj > best_obj + 1e-12 * max(1.0, best_obj):
            # adaptive restart keeps the iteration monotone in practice
            y, t_next = r_next, 1.0
        r, t = r_next, t_next
    return CovarianceDesign(best, best_obj, it, converged)
