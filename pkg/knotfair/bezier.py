"""Cubic Bezier segment geometry.

Evaluation, derivatives, curvature, arc length and bending energy by
Gauss-Legendre quadrature, de Casteljau splitting, and pairwise
intersection by bounding-box subdivision with a Newton polish.

The scalar entry points take a :class:`CubicSegment`; the ``*_array``
helpers take stacked control points of shape ``(k, 4, 2)`` and are what the
objective uses in its inner loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import minimize_scalar

from .errors import DegenerateSpeed

GAUSS_ORDER = 24
GAUSS_MAX_ORDER = 768
QUADRATURE_RTOL = 1e-8
SPEED_EPS = 1e-9


class Point2(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True, slots=True, eq=False)
class CubicSegment:
    """Four control points stored as a read-only ``(4, 2)`` float array."""

    points: np.ndarray

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=float)
        if pts.shape != (4, 2):
            raise ValueError(f"cubic segment needs 4x2 control points, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("cubic segment control points must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_points(cls, p0, p1, p2, p3) -> "CubicSegment":
        return cls(np.array([p0, p1, p2, p3], dtype=float))

    @classmethod
    def line(cls, start, end) -> "CubicSegment":
        """A straight segment with handles at 1/3 and 2/3 (uniform speed)."""
        start = np.asarray(start, dtype=float)
        end = np.asarray(end, dtype=float)
        return cls(np.array([start, start + (end - start) / 3.0, start + 2.0 * (end - start) / 3.0, end]))

    @property
    def p0(self) -> Point2:
        return Point2(*map(float, self.points[0]))

    @property
    def p1(self) -> Point2:
        return Point2(*map(float, self.points[1]))

    @property
    def p2(self) -> Point2:
        return Point2(*map(float, self.points[2]))

    @property
    def p3(self) -> Point2:
        return Point2(*map(float, self.points[3]))

    @property
    def degenerate(self) -> bool:
        return bool(np.array_equal(self.points[0], self.points[3]))

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        """Bounding box of the control polygon (contains the curve)."""
        return self.points.min(axis=0), self.points.max(axis=0)

    def diagonal(self) -> float:
        lo, hi = self.bbox()
        return float(np.hypot(*(hi - lo)))

    def transformed(self, matrix, offset=(0.0, 0.0)) -> "CubicSegment":
        matrix = np.asarray(matrix, dtype=float)
        return CubicSegment(self.points @ matrix.T + np.asarray(offset, dtype=float))

    def __repr__(self) -> str:
        return f"CubicSegment({self.points.tolist()!r})"


@dataclass(frozen=True, slots=True)
class Crossing:
    """An intersection of two segments; labels are 1-based and ``seg_a < seg_b``.

    ``angle`` is the acute angle between the tangents, in radians.
    """

    seg_a: int
    t_a: float
    seg_b: int
    t_b: float
    point: Point2
    angle: float
    tangential: bool = False

    @property
    def pair(self) -> tuple[int, int]:
        return (self.seg_a, self.seg_b)


@dataclass(frozen=True, slots=True)
class IntersectOptions:
    tolerance: float = 1e-10
    endpoint_exclusion: float = 1e-6
    flatness: float = 1e-4
    angle_tolerance: float = 1e-6
    max_depth: int = 48
    dedup: float = 1e-7


DEFAULT_INTERSECT = IntersectOptions()
# closest approach below this fraction of the segment size counts as contact
CONTACT_DISTANCE = 1e-8
TOUCH_MERGE = 1e-4


# --- scalar evaluation -------------------------------------------------------


def evaluate(seg: CubicSegment, t: float) -> Point2:
    """Bernstein form of the segment at ``t``; exact at both endpoints."""
    (x0, y0), (x1, y1), (x2, y2), (x3, y3) = seg.points.tolist()
    return Point2(*_eval8((x0, y0, x1, y1, x2, y2, x3, y3), float(t)))


def derivatives(seg: CubicSegment, t: float) -> tuple[Point2, Point2]:
    """First and second derivative vectors at ``t``."""
    p = tuple(seg.points.ravel().tolist())
    t = float(t)
    s = 1.0 - t
    x0, y0, x1, y1, x2, y2, x3, y3 = p
    d1 = Point2(*_d1_8(p, t))
    d2 = Point2(
        6.0 * (s * (x2 - 2.0 * x1 + x0) + t * (x3 - 2.0 * x2 + x1)),
        6.0 * (s * (y2 - 2.0 * y1 + y0) + t * (y3 - 2.0 * y2 + y1)),
    )
    return d1, d2


def curvature(seg: CubicSegment, t: float) -> float:
    d1, d2 = derivatives(seg, t)
    speed = math.hypot(d1.x, d1.y)
    if speed <= SPEED_EPS * seg.diagonal():
        raise DegenerateSpeed(f"zero speed at t={float(t):.6g}")
    return abs(d1.x * d2.y - d1.y * d2.x) / speed**3


def split(seg: CubicSegment, t: float) -> tuple[CubicSegment, CubicSegment]:
    """de Casteljau subdivision at ``t``; the pieces share the split point exactly."""
    left, right = split_array(seg.points, float(t))
    return CubicSegment(left), CubicSegment(right)


def split_array(points: np.ndarray, t: float) -> tuple[np.ndarray, np.ndarray]:
    p0, p1, p2, p3 = np.asarray(points, dtype=float)
    s = 1.0 - t
    p01 = s * p0 + t * p1
    p12 = s * p1 + t * p2
    p23 = s * p2 + t * p3
    p012 = s * p01 + t * p12
    p123 = s * p12 + t * p23
    mid = s * p012 + t * p123
    return np.array([p0, p01, p012, mid]), np.array([mid, p123, p23, p3])


def segment_between(seg: CubicSegment, t0: float, t1: float) -> CubicSegment:
    """The piece of ``seg`` on ``[t0, t1]`` as its own cubic."""
    if t1 <= t0:
        point = np.array(evaluate(seg, t0))
        return CubicSegment(np.tile(point, (4, 1)))
    if t1 >= 1.0:
        right = seg.points if t0 <= 0.0 else split_array(seg.points, t0)[1]
        return CubicSegment(right)
    left = split_array(seg.points, t1)[0]
    if t0 <= 0.0:
        return CubicSegment(left)
    return CubicSegment(split_array(left, t0 / t1)[1])


# --- vectorized evaluation ---------------------------------------------------


def points_array(ctrl: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Curve points for control points ``(k, 4, 2)`` at parameters ``t`` of shape ``(m,)`` or ``(k, m)``."""
    ctrl = np.asarray(ctrl, dtype=float)
    t = np.asarray(t, dtype=float)
    s = 1.0 - t
    terms = (s * s * s, 3.0 * s * s * t, 3.0 * s * t * t, t * t * t)
    return sum(b[..., None] * ctrl[:, None, j] for j, b in enumerate(terms))


def first_derivative_array(ctrl: np.ndarray, t: np.ndarray) -> np.ndarray:
    ctrl = np.asarray(ctrl, dtype=float)
    t = np.asarray(t, dtype=float)
    d = ctrl[:, 1:] - ctrl[:, :-1]
    s = 1.0 - t
    terms = (s * s, 2.0 * s * t, t * t)
    return 3.0 * sum(b[..., None] * d[:, None, j] for j, b in enumerate(terms))


def second_derivative_array(ctrl: np.ndarray, t: np.ndarray) -> np.ndarray:
    ctrl = np.asarray(ctrl, dtype=float)
    t = np.asarray(t, dtype=float)
    d = ctrl[:, 1:] - ctrl[:, :-1]
    e = d[:, 1:] - d[:, :-1]
    s = 1.0 - t
    return 6.0 * (s[..., None] * e[:, None, 0] + t[..., None] * e[:, None, 1])


def curvature_array(ctrl: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Unsigned curvature ``(k, m)``; raises :class:`DegenerateSpeed` at stationary points."""
    ctrl = np.asarray(ctrl, dtype=float)
    d1 = first_derivative_array(ctrl, t)
    d2 = second_derivative_array(ctrl, t)
    speed = np.hypot(d1[..., 0], d1[..., 1])
    _check_speed(ctrl, speed)
    cross = d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]
    return np.abs(cross) / speed**3


def diagonals(ctrl: np.ndarray) -> np.ndarray:
    span = ctrl.max(axis=1) - ctrl.min(axis=1)
    return np.hypot(span[:, 0], span[:, 1])


def _check_speed(ctrl: np.ndarray, speed: np.ndarray) -> None:
    eps = SPEED_EPS * diagonals(ctrl)
    bad = speed <= eps.reshape((-1,) + (1,) * (speed.ndim - 1))
    if np.any(bad):
        index = int(np.argwhere(bad)[0][0])
        raise DegenerateSpeed(f"segment {index + 1} has a stationary point")


# --- quadrature --------------------------------------------------------------


@lru_cache(maxsize=None)
def gauss_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to ``[0, 1]``."""
    x, w = leggauss(order)
    t = 0.5 * (x + 1.0)
    w = 0.5 * w
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def _speed_integrand(ctrl: np.ndarray, t: np.ndarray) -> np.ndarray:
    d1 = first_derivative_array(ctrl, t)
    return np.hypot(d1[..., 0], d1[..., 1])


def _bending_integrand(ctrl: np.ndarray, t: np.ndarray) -> np.ndarray:
    d1 = first_derivative_array(ctrl, t)
    d2 = second_derivative_array(ctrl, t)
    speed = np.hypot(d1[..., 0], d1[..., 1])
    _check_speed(ctrl, speed)
    cross = d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]
    return cross * cross / speed**5


def _integrate(integrand, ctrl: np.ndarray, lo: np.ndarray, hi: np.ndarray, order: int) -> np.ndarray:
    nodes, weights = gauss_rule(order)
    width = hi - lo
    t = lo[:, None] + width[:, None] * nodes[None, :]
    return (integrand(ctrl, t) * weights[None, :]).sum(axis=1) * width


def _adaptive(integrand, ctrl: np.ndarray, lo=None, hi=None) -> np.ndarray:
    ctrl = np.asarray(ctrl, dtype=float)
    k = ctrl.shape[0]
    lo = np.zeros(k) if lo is None else np.broadcast_to(np.asarray(lo, dtype=float), (k,))
    hi = np.ones(k) if hi is None else np.broadcast_to(np.asarray(hi, dtype=float), (k,))
    order = GAUSS_ORDER
    previous = _integrate(integrand, ctrl, lo, hi, order // 2)
    result = _integrate(integrand, ctrl, lo, hi, order)
    pending = np.flatnonzero(np.abs(result - previous) > QUADRATURE_RTOL * np.abs(result))
    while pending.size and order < GAUSS_MAX_ORDER:
        order *= 2
        refined = _integrate(integrand, ctrl[pending], lo[pending], hi[pending], order)
        converged = np.abs(refined - result[pending]) <= QUADRATURE_RTOL * np.abs(refined)
        result[pending] = refined
        pending = pending[~converged]
    return result


def arc_length_array(ctrl: np.ndarray, lo=None, hi=None) -> np.ndarray:
    return _adaptive(_speed_integrand, ctrl, lo, hi)


def bending_energy_array(ctrl: np.ndarray) -> np.ndarray:
    """Per-segment integral of curvature squared over arc length."""
    return _adaptive(_bending_integrand, ctrl)


def arc_length(seg: CubicSegment, t0: float = 0.0, t1: float = 1.0) -> float:
    return float(arc_length_array(seg.points[None], t0, t1)[0])


def bending_energy(seg: CubicSegment) -> float:
    return float(bending_energy_array(seg.points[None])[0])


def parameter_at_length(seg: CubicSegment, length: float, tol: float = 1e-12) -> float:
    """Parameter ``t`` whose arc length from 0 equals ``length`` (clamped to the segment)."""
    total = arc_length(seg)
    if length <= 0.0:
        return 0.0
    if length >= total:
        return 1.0
    lo, hi = 0.0, 1.0
    t = length / total
    for _ in range(60):
        error = arc_length(seg, 0.0, t) - length
        if abs(error) <= tol * max(total, 1.0):
            break
        if error > 0:
            hi = t
        else:
            lo = t
        d1, _ = derivatives(seg, t)
        speed = math.hypot(d1.x, d1.y)
        step = t - error / speed if speed > 0 else -1.0
        t = step if lo < step < hi else 0.5 * (lo + hi)
    return t


# --- intersection ------------------------------------------------------------
# Subdivision runs on plain float 8-tuples (x0, y0, ..., x3, y3).


def _eval8(p, t: float) -> tuple[float, float]:
    x0, y0, x1, y1, x2, y2, x3, y3 = p
    s = 1.0 - t
    b0 = s * s * s
    b1 = 3.0 * s * s * t
    b2 = 3.0 * s * t * t
    b3 = t * t * t
    return (b0 * x0 + b1 * x1 + b2 * x2 + b3 * x3, b0 * y0 + b1 * y1 + b2 * y2 + b3 * y3)


def _d1_8(p, t: float) -> tuple[float, float]:
    x0, y0, x1, y1, x2, y2, x3, y3 = p
    s = 1.0 - t
    return (
        3.0 * (s * s * (x1 - x0) + 2.0 * s * t * (x2 - x1) + t * t * (x3 - x2)),
        3.0 * (s * s * (y1 - y0) + 2.0 * s * t * (y2 - y1) + t * t * (y3 - y2)),
    )


def _halves8(p):
    x0, y0, x1, y1, x2, y2, x3, y3 = p
    ax, ay = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
    bx, by = 0.5 * (x1 + x2), 0.5 * (y1 + y2)
    cx, cy = 0.5 * (x2 + x3), 0.5 * (y2 + y3)
    abx, aby = 0.5 * (ax + bx), 0.5 * (ay + by)
    bcx, bcy = 0.5 * (bx + cx), 0.5 * (by + cy)
    mx, my = 0.5 * (abx + bcx), 0.5 * (aby + bcy)
    return (x0, y0, ax, ay, abx, aby, mx, my), (mx, my, bcx, bcy, cx, cy, x3, y3)


def _box8(p) -> tuple[float, float, float, float]:
    xs = p[0::2]
    ys = p[1::2]
    return min(xs), min(ys), max(xs), max(ys)


def _is_flat(p, tol: float) -> bool:
    x0, y0, x1, y1, x2, y2, x3, y3 = p
    dx, dy = x3 - x0, y3 - y0
    length = math.hypot(dx, dy)
    if length <= tol:
        return max(math.hypot(x1 - x0, y1 - y0), math.hypot(x2 - x0, y2 - y0)) <= tol
    d1 = abs((x1 - x0) * dy - (y1 - y0) * dx) / length
    d2 = abs((x2 - x0) * dy - (y2 - y0) * dx) / length
    return max(d1, d2) <= tol


def _chord_params(a, b) -> Optional[tuple[float, float]]:
    ax, ay, bx, by = a[0], a[1], a[6], a[7]
    cx, cy, dx, dy = b[0], b[1], b[6], b[7]
    ux, uy = bx - ax, by - ay
    vx, vy = dx - cx, dy - cy
    det = ux * vy - uy * vx
    scale = math.hypot(ux, uy) * math.hypot(vx, vy)
    if scale == 0.0 or abs(det) <= 1e-12 * scale:
        return None
    wx, wy = cx - ax, cy - ay
    return (wx * vy - wy * vx) / det, (wx * uy - wy * ux) / det


def _parallel_chords(a, b, angle_tolerance: float) -> bool:
    ux, uy = a[6] - a[0], a[7] - a[1]
    vx, vy = b[6] - b[0], b[7] - b[1]
    if (ux == 0.0 and uy == 0.0) or (vx == 0.0 and vy == 0.0):
        return True
    return math.atan2(abs(ux * vy - uy * vx), abs(ux * vx + uy * vy)) <= angle_tolerance


def _point_to_chord(px: float, py: float, x0: float, y0: float, x1: float, y1: float) -> float:
    dx, dy = x1 - x0, y1 - y0
    length2 = dx * dx + dy * dy
    t = 0.0 if length2 == 0.0 else min(max(((px - x0) * dx + (py - y0) * dy) / length2, 0.0), 1.0)
    return math.hypot(px - x0 - t * dx, py - y0 - t * dy)


def _chord_gap(a, b) -> float:
    """Distance between the chords of two pieces that do not cross."""
    return min(
        _point_to_chord(a[0], a[1], b[0], b[1], b[6], b[7]),
        _point_to_chord(a[6], a[7], b[0], b[1], b[6], b[7]),
        _point_to_chord(b[0], b[1], a[0], a[1], a[6], a[7]),
        _point_to_chord(b[6], b[7], a[0], a[1], a[6], a[7]),
    )


def _project(b, x: float, y: float, u0: float, u1: float) -> tuple[float, float]:
    """Parameter in [u0, u1] of the point of ``b`` nearest (x, y), and the distance."""
    u = 0.5 * (u0 + u1)
    for _ in range(12):
        bx, by = _eval8(b, u)
        dx, dy = _d1_8(b, u)
        speed2 = dx * dx + dy * dy
        if speed2 == 0.0:
            break
        step = ((x - bx) * dx + (y - by) * dy) / speed2
        nu = min(max(u + step, u0), u1)
        if abs(nu - u) <= 1e-16:
            break
        u = nu
    bx, by = _eval8(b, u)
    return u, math.hypot(x - bx, y - by)


def _closest_approach(a, b, a0: float, a1: float, b0: float, b1: float) -> tuple[float, float, float]:
    """Closest points of two short pieces: (s, u, distance)."""
    width = a1 - a0

    def gap(tau: float) -> float:
        return _project(b, *_eval8(a, a0 + tau * width), b0, b1)[1]

    # local parameter: the bounded solver's tolerance is relative to |x|
    tau = float(minimize_scalar(gap, bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-10}).x)
    s = a0 + tau * width
    u, distance = _project(b, *_eval8(a, s), b0, b1)
    return s, u, distance


def _newton(a, b, s: float, u: float, tol: float, scale: float) -> Optional[tuple[float, float]]:
    for _ in range(40):
        fax, fay = _eval8(a, s)
        fbx, fby = _eval8(b, u)
        rx, ry = fax - fbx, fay - fby
        dax, day = _d1_8(a, s)
        dbx, dby = _d1_8(b, u)
        det = dbx * day - dax * dby
        if abs(det) <= 1e-14 * (math.hypot(dax, day) * math.hypot(dbx, dby) + 1e-300):
            return None
        ds = (rx * dby - dbx * ry) / det
        du = (rx * day - dax * ry) / det
        s += ds
        u += du
        if not (-0.5 < s < 1.5 and -0.5 < u < 1.5):
            return None
        if abs(ds) <= tol and abs(du) <= tol:
            fax, fay = _eval8(a, s)
            fbx, fby = _eval8(b, u)
            if math.hypot(fax - fbx, fay - fby) > 1e-8 * scale:
                return None
            if -1e-9 <= s <= 1.0 + 1e-9 and -1e-9 <= u <= 1.0 + 1e-9:
                return min(max(s, 0.0), 1.0), min(max(u, 0.0), 1.0)
            return None
    return None


def _tangent_angle(a, b, s: float, u: float) -> Optional[float]:
    dax, day = _d1_8(a, s)
    dbx, dby = _d1_8(b, u)
    if math.hypot(dax, day) == 0.0 or math.hypot(dbx, dby) == 0.0:
        return None
    return math.atan2(abs(dax * dby - day * dbx), abs(dax * dbx + day * dby))


def _within(lo: float, hi: float, end: float, radius: float) -> bool:
    return abs(lo - end) < radius and abs(hi - end) < radius


def _shared_ends(a, b) -> list[tuple[float, float]]:
    ends_a = ((0.0, (a[0], a[1])), (1.0, (a[6], a[7])))
    ends_b = ((0.0, (b[0], b[1])), (1.0, (b[6], b[7])))
    return [(ta, tb) for ta, pa in ends_a for tb, pb in ends_b if pa == pb]


def intersect(
    a: CubicSegment,
    b: CubicSegment,
    opts: IntersectOptions = DEFAULT_INTERSECT,
    *,
    labels: tuple[int, int] = (1, 2),
) -> list[Crossing]:
    """All intersections of two segments, sorted by parameter on ``a``.

    Hits within ``opts.endpoint_exclusion`` of an endpoint the two segments
    share are dropped. Contacts with parallel tangents come back with
    ``tangential=True``: flat pieces with parallel chords, and pieces whose
    parameter widths fall below ``sqrt(opts.tolerance)`` without a Newton
    root, are settled by their closest approach instead of further
    subdivision.
    """
    pa = tuple(a.points.ravel().tolist())
    pb = tuple(b.points.ravel().tolist())
    scale = max(a.diagonal(), b.diagonal(), 1e-300)
    flat_tol = opts.flatness * scale
    pad = 1e-12 * scale
    shared = _shared_ends(pa, pb)
    width_floor = math.sqrt(opts.tolerance)
    contact = CONTACT_DISTANCE * scale

    # (s, u, tangential, distance)
    found: list[tuple[float, float, bool, float]] = []

    def touch(a0: float, a1: float, b0: float, b1: float) -> None:
        s, u, distance = _closest_approach(pa, pb, a0, a1, b0, b1)
        if distance <= contact:
            found.append((s, u, True, distance))

    stack = [(pa, 0.0, 1.0, pb, 0.0, 1.0, 0)]
    while stack:
        qa, a0, a1, qb, b0, b1, depth = stack.pop()
        ax0, ay0, ax1, ay1 = _box8(qa)
        bx0, by0, bx1, by1 = _box8(qb)
        if ax0 > bx1 + pad or bx0 > ax1 + pad or ay0 > by1 + pad or by0 > ay1 + pad:
            continue
        if any(
            _within(a0, a1, ea, opts.endpoint_exclusion) and _within(b0, b1, eb, opts.endpoint_exclusion)
            for ea, eb in shared
        ):
            continue
        if depth >= opts.max_depth:
            s, u = 0.5 * (a0 + a1), 0.5 * (b0 + b1)
            xa, ya = _eval8(pa, s)
            xb, yb = _eval8(pb, u)
            if math.hypot(xa - xb, ya - yb) <= contact:
                found.append((s, u, True, math.hypot(xa - xb, ya - yb)))
            continue
        flat = _is_flat(qa, flat_tol) and _is_flat(qb, flat_tol)
        if (flat and _parallel_chords(qa, qb, opts.angle_tolerance)) or (
            a1 - a0 <= width_floor and b1 - b0 <= width_floor
        ):
            touch(a0, a1, b0, b1)
            continue
        if flat:
            guess = _chord_params(qa, qb)
            if guess is not None:
                gu, gv = guess
                if -0.1 <= gu <= 1.1 and -0.1 <= gv <= 1.1:
                    s0 = a0 + (a1 - a0) * min(max(gu, 0.0), 1.0)
                    u0 = b0 + (b1 - b0) * min(max(gv, 0.0), 1.0)
                    root = _newton(pa, pb, s0, u0, opts.tolerance, scale)
                    if root is not None:
                        found.append((root[0], root[1], False, 0.0))
                        continue
                    # Newton stalled: keep subdividing this pair.
                else:
                    # chords miss each other; the pieces can still touch
                    if _chord_gap(qa, qb) <= 2.0 * flat_tol:
                        touch(a0, a1, b0, b1)
                    continue
        la, ra = _halves8(qa)
        lb, rb = _halves8(qb)
        am, bm = 0.5 * (a0 + a1), 0.5 * (b0 + b1)
        depth += 1
        stack.append((ra, am, a1, rb, bm, b1, depth))
        stack.append((ra, am, a1, lb, b0, bm, depth))
        stack.append((la, a0, am, rb, bm, b1, depth))
        stack.append((la, a0, am, lb, b0, bm, depth))

    found.sort()
    accepted: list[tuple[float, float, bool, float]] = []
    for hit in found:
        s, u, flagged, distance = hit
        if any(abs(s - ea) < opts.endpoint_exclusion and abs(u - eb) < opts.endpoint_exclusion for ea, eb in shared):
            continue
        # neighbouring pieces report the same touch; keep the closest one
        radius = max(opts.dedup, TOUCH_MERGE) if flagged else opts.dedup
        for i, (s2, u2, flagged2, distance2) in enumerate(accepted):
            if abs(s - s2) <= radius and abs(u - u2) <= radius:
                if flagged and flagged2 and distance < distance2:
                    accepted[i] = hit
                break
        else:
            accepted.append(hit)

    label_a, label_b = labels
    crossings = []
    for s, u, flagged, _ in accepted:
        xa, ya = _eval8(pa, s)
        xb, yb = _eval8(pb, u)
        angle = _tangent_angle(pa, pb, s, u)
        tangential = flagged or angle is None or angle < opts.angle_tolerance
        point = Point2(0.5 * (xa + xb), 0.5 * (ya + yb))
        if label_a < label_b:
            crossings.append(Crossing(label_a, s, label_b, u, point, angle or 0.0, tangential))
        else:
            crossings.append(Crossing(label_b, u, label_a, s, point, angle or 0.0, tangential))
    return crossings
