"""Arc-shaped feasible sets on the unit circle and the projectors onto them.

Every entry of a constant-modulus vector is confined to an arc ``{exp(j t) : t in
[l, u]}``. Arcs are stored as a centre angle and a half-width, which sidesteps
2*pi wrap-around when comparing angles; ``l`` and ``u`` are derived on demand.

All projectors are vectorized: ``x``, ``l`` and ``u`` broadcast against each other.
"""
from __future__ import annotations

import numpy as np

__all__ = [
    "ArcBox",
    "arc_bounds",
    "project_arc",
    "project_hull",
    "project_arc_cw",
    "project_hull_cw",
    "arc_projector",
    "hull_projector",
]

TWO_PI = 2.0 * np.pi


class ArcBox:
    """Product of per-entry arcs ``arg x(n) in [l_n, u_n]``.

    Parameters
    ----------
    center : array_like
        Arc mid-angles.
    half_width : array_like
        Arc half-widths, in ``[0, pi]``.
    """

    __slots__ = ("center", "half_width")

    def __init__(self, center, half_width):
        center = np.array(center, dtype=float, ndmin=1)
        half_width = np.array(half_width, dtype=float, ndmin=1)
        if center.shape != half_width.shape:
            raise ValueError("center and half_width must have the same shape")
        if np.any(half_width < 0) or np.any(half_width > np.pi + 1e-12):
            raise ValueError("arc widths must lie in [0, 2*pi]")
        self.center = center
        self.half_width = np.minimum(half_width, np.pi)

    @classmethod
    def from_bounds(cls, l, u) -> "ArcBox":
        l = np.asarray(l, dtype=float)
        u = np.asarray(u, dtype=float)
        if np.any(u < l):
            raise ValueError("upper angles must be >= lower angles")
        return cls((l + u) / 2.0, (u - l) / 2.0)

    @property
    def l(self) -> np.ndarray:
        return self.center - self.half_width

    @property
    def u(self) -> np.ndarray:
        return self.center + self.half_width

    @property
    def widths(self) -> np.ndarray:
        """Opening angles ``phi_n = u_n - l_n``."""
        return 2.0 * self.half_width

    def __len__(self):
        return self.center.size

    def split(self, index: int) -> tuple["ArcBox", "ArcBox"]:
        """Halve arc ``index`` at its midpoint; all other arcs are copied."""
        quarter = self.half_width[index] / 2.0
        left_c, right_c = self.center.copy(), self.center.copy()
        hw = self.half_width.copy()
        hw[index] = quarter
        left_c[index] -= quarter
        right_c[index] += quarter
        return ArcBox(left_c, hw), ArcBox(right_c, hw.copy())

    def contains(self, x, tol: float = 1e-9) -> bool:
        """Whether every entry of ``x`` has unit modulus and lies on its arc."""
        x = np.asarray(x)
        if np.any(np.abs(np.abs(x) - 1.0) > tol):
            return False
        offset = np.angle(x * np.exp(-1j * self.center))
        return bool(np.all(np.abs(offset) <= self.half_width + tol))

    def __repr__(self):
        return f"ArcBox(l={self.l!r}, u={self.u!r})"


def arc_bounds(x0, epsilon: float) -> ArcBox:
    """Arcs equivalent to ``|x(n) - x0(n)| <= epsilon`` for unit-modulus entries.

    The half-width around each reference phase is ``arccos(1 - epsilon^2 / 2)``.
    """
    if not 0.0 <= epsilon <= 2.0:
        raise ValueError(f"epsilon must lie in [0, 2], got {epsilon!r}")
    x0 = np.asarray(x0)
    half = np.arccos(np.clip(1.0 - epsilon**2 / 2.0, -1.0, 1.0))
    return ArcBox(np.angle(x0), np.full(x0.shape, half))


def arc_projector(center, half_width):
    """Projector onto fixed arcs, with the per-arc constants computed once.

    Points outside an arc snap to the nearer endpoint (the boundary between the
    two endpoints is the bisector opposite the arc centre). ``x = 0`` maps to
    the arc midpoint.
    """
    half_width = np.asarray(half_width, dtype=float)
    n = np.exp(1j * np.asarray(center, dtype=float))
    nc = n.conj()

    def project(x):
        x = np.asarray(x, dtype=complex)
        psi = np.clip(np.angle(x * nc), -half_width, half_width)
        psi = np.where(x == 0, 0.0, psi)
        return n * np.exp(1j * psi)

    return project


def project_arc_cw(x, center, half_width):
    """Nearest point on the arc, given its centre angle and half-width."""
    return arc_projector(center, half_width)(x)


def project_arc(x, l, u):
    """Projector onto the arc ``{exp(j t) : t in [l, u]}`` (output has unit modulus)."""
    l = np.asarray(l, dtype=float)
    u = np.asarray(u, dtype=float)
    return project_arc_cw(x, (l + u) / 2.0, (u - l) / 2.0)


def hull_projector(center, half_width):
    """Projector onto the circular segments spanned by fixed arcs.

    The segment is the unit disc cut by the chord ``AB`` between the arc
    endpoints ``A = exp(j l)`` and ``B = exp(j u)``. The plane splits into five
    regions:

    * ``M1``: inside the segment, returned unchanged;
    * ``M2`` / ``M3``: normal cones at ``A`` / ``B``, mapped to the endpoint;
    * ``M4``: beyond the chord, between the chord normals through ``A`` and ``B``,
      mapped to the foot of the perpendicular on ``AB``;
    * ``M5``: everything else, radially normalized onto the arc.

    The region tests are evaluated on ``v = p + jq = exp(-j center) x``, in which
    the chord is the vertical line ``p = cos(h)``; this keeps them accurate for
    arbitrarily short arcs.
    """
    center = np.asarray(center, dtype=float)
    half_width = np.asarray(half_width, dtype=float)
    n = np.exp(1j * center)
    nc = n.conj()
    cos_h, sin_h = np.cos(half_width), np.sin(half_width)
    a_rot = cos_h - 1j * sin_h
    b_rot = cos_h + 1j * sin_h
    point = half_width <= 0.0
    disc = half_width >= np.pi
    special = bool(np.any(point) or np.any(disc))

    def project(x):
        x = np.asarray(x, dtype=complex)
        v = x * nc
        p, q = v.real, v.imag
        # radial normalization; angle() avoids overflow for subnormal inputs
        out = np.exp(1j * np.angle(v))
        # M4: -sin(h) <= q <= sin(h) and beyond the chord p < cos(h)
        out = np.where((p < cos_h) & (np.abs(q) <= sin_h), cos_h + 1j * q, out)
        # M3 / M2: past the chord normal and on the far side of OB / OA
        out = np.where((q >= sin_h) & (p * sin_h - q * cos_h <= 0), b_rot, out)
        out = np.where((q <= -sin_h) & (q * cos_h + p * sin_h <= 0), a_rot, out)
        out = n * out
        # M1, returned bit-exact: p >= cos(h) holds on the arc side for every opening
        mod2 = p * p + q * q
        out = np.where((p >= cos_h) & (mod2 <= 1.0), x, out)
        if special:
            out = np.where(point, n, out)
            out = np.where(disc, np.where(mod2 > 1.0, np.exp(1j * np.angle(x)), x), out)
        return out

    return project


def project_hull_cw(x, center, half_width):
    """Nearest point of the circular segment spanned by the arc; see :func:`hull_projector`."""
    return hull_projector(center, half_width)(x)


def project_hull(x, l, u):
    """Projector onto the convex hull of the arc ``[l, u]`` (a circular segment)."""
    l = np.asarray(l, dtype=float)
    u = np.asarray(u, dtype=float)
    return project_hull_cw(x, (l + u) / 2.0, (u - l) / 2.0)
