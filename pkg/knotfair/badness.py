"""The objective: how visually displeasing a knot diagram is.

Every component is computed on the normalized knot (total arc length 1,
node centroid at the origin), so the weighted total is invariant under
rigid motions and uniform scaling. :func:`badness` is total: degenerate
geometry scores :data:`SENTINEL` instead of raising.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .bezier import (
    Crossing,
    arc_length_array,
    bending_energy_array,
    curvature_array,
    first_derivative_array,
    gauss_rule,
    points_array,
)
from .errors import DegenerateKnot, KnotError
from .knot import ControlPoints, KnotVec, MinObj, crossings, fingerprint_of, from_knotvec, to_controlpoints
from .models import BadnessWeights, ComponentBreakdown, ComponentValues, TopologyFingerprint

logger = logging.getLogger(__name__)

SENTINEL = 1e12
POLYLINE_TOLERANCE = 1e-4
COMPONENTS = ("angle", "bend", "cross_sep", "repel", "topology", "curvature_variation", "node_proximity")

Knot = Union[KnotVec, MinObj, ControlPoints]


def as_controlpoints(knot: Knot) -> ControlPoints:
    if isinstance(knot, ControlPoints):
        return knot
    if isinstance(knot, KnotVec):
        knot = from_knotvec(knot)
    return to_controlpoints(knot)


def hinge(distance, radius: float):
    """``max(0, 1 - d/r)**2``, elementwise for arrays."""
    return np.maximum(0.0, 1.0 - np.asarray(distance, dtype=float) / radius) ** 2


def normalize(c: ControlPoints) -> tuple[ControlPoints, float]:
    """Scale to total arc length 1 and move the node centroid to the origin."""
    total = float(arc_length_array(c.segments).sum())
    span = np.ptp(c.segments.reshape(-1, 2), axis=0)
    if not math.isfinite(total) or total <= 1e-12 * max(float(np.hypot(*span)), 1e-300):
        raise DegenerateKnot(f"total arc length {total:.3g} is too small to normalize")
    scale = 1.0 / total
    return ControlPoints((c.segments - c.centroid()) * scale), scale


# --- components on an already normalized knot -------------------------------


def _angle_term(found: Sequence[Crossing]) -> float:
    return float(sum(math.cos(x.angle) ** 2 for x in found))


def pair_hinge_sum(points: np.ndarray, radius: float) -> float:
    """Sum of :func:`hinge` over all pairwise distances of ``points``."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(points) < 2:
        return 0.0
    i, j = np.triu_indices(len(points), 1)
    distance = np.hypot(*(points[i] - points[j]).T)
    return float(hinge(distance, radius).sum())


def _separation_term(found: Sequence[Crossing], radius: float) -> float:
    return pair_hinge_sum(np.array([x.point for x in found]), radius)


def _sample_count(ctrl: np.ndarray, tolerance: float) -> int:
    second = np.concatenate([ctrl[:, 2] - 2 * ctrl[:, 1] + ctrl[:, 0], ctrl[:, 3] - 2 * ctrl[:, 2] + ctrl[:, 1]])
    worst = float(np.hypot(*second.T).max()) if len(second) else 0.0
    return int(min(64, max(2, math.ceil(math.sqrt(6.0 * worst / (8.0 * tolerance))))))


def _point_to_polyline(points: np.ndarray, line: np.ndarray) -> np.ndarray:
    """Minimum distance from each point set ``(K, m, 2)`` to each polyline ``(K, m, 2)``."""
    start = line[:, None, :-1]
    step = line[:, None, 1:] - start
    rel = points[:, :, None] - start
    length2 = (step * step).sum(axis=-1)
    u = np.where(length2 > 0, (rel * step).sum(axis=-1) / np.where(length2 > 0, length2, 1.0), 0.0)
    u = np.clip(u, 0.0, 1.0)
    offset = rel - u[..., None] * step
    return np.hypot(offset[..., 0], offset[..., 1]).min(axis=(1, 2))


def segment_distances(c: ControlPoints, pairs: Sequence[tuple[int, int]], tolerance: float = POLYLINE_TOLERANCE) -> np.ndarray:
    """Approximate minimum distance between the 0-based segment pairs, via polylines."""
    if not pairs:
        return np.zeros(0)
    idx = np.array(pairs)
    t = np.linspace(0.0, 1.0, _sample_count(c.segments, tolerance) + 1)
    first = points_array(c.segments[idx[:, 0]], t)
    second = points_array(c.segments[idx[:, 1]], t)
    return np.minimum(_point_to_polyline(first, second), _point_to_polyline(second, first))


def _repel_term(c: ControlPoints, found: Sequence[Crossing], radius: float) -> float:
    n = c.n
    crossing_pairs = {(x.seg_a - 1, x.seg_b - 1) for x in found}
    lo = c.segments.min(axis=1)
    hi = c.segments.max(axis=1)
    pairs = []
    for i in range(n):
        for j in range(i + 2, n):
            if j - i == n - 1 or (i, j) in crossing_pairs:
                continue
            gap = np.maximum(0.0, np.maximum(lo[i] - hi[j], lo[j] - hi[i]))
            if float(np.hypot(*gap)) < radius:
                pairs.append((i, j))
    return float(hinge(segment_distances(c, pairs), radius).sum())


def _topology_term(found: Sequence[Crossing], ref: TopologyFingerprint, penalty: float) -> float:
    return penalty * ref.discrepancy(fingerprint_of(list(found)))


def _curvature_variation_term(c: ControlPoints) -> float:
    nodes, weights = gauss_rule(24)
    kappa = curvature_array(c.segments, nodes)
    d1 = first_derivative_array(c.segments, nodes)
    ds = np.hypot(d1[..., 0], d1[..., 1]) * weights
    length = ds.sum()
    mean = (kappa * ds).sum() / length
    return float(((kappa - mean) ** 2 * ds).sum() / length)


def _node_proximity_term(found: Sequence[Crossing], radius: float) -> float:
    ends = [min(t, 1.0 - t) for x in found for t in (x.t_a, x.t_b)]
    return float(hinge(ends, radius).sum()) if ends else 0.0


# --- public component functions ----------------------------------------------


def total_crossing_angles(c: Knot) -> float:
    """Sum of cos^2 of the crossing angles; 0 when every crossing is perpendicular."""
    return _angle_term(crossings(as_controlpoints(c)))


def total_bending_energy(c: Knot) -> float:
    normal, _ = normalize(as_controlpoints(c))
    return float(bending_energy_array(normal.segments).sum())


def crossing_separation_badness(c: Knot, radius: float = BadnessWeights().cross_sep_radius) -> float:
    normal, _ = normalize(as_controlpoints(c))
    return _separation_term(crossings(normal), radius)


def repel_badness(c: Knot, radius: float = BadnessWeights().repel_radius) -> float:
    normal, _ = normalize(as_controlpoints(c))
    return _repel_term(normal, crossings(normal), radius)


def topology_badness(c: Knot, ref: TopologyFingerprint, penalty: float = BadnessWeights().topology_penalty) -> float:
    return _topology_term(crossings(as_controlpoints(c)), ref, penalty)


def curvature_variation_badness(c: Knot) -> float:
    normal, _ = normalize(as_controlpoints(c))
    return _curvature_variation_term(normal)


def node_proximity_badness(c: Knot, radius: float = BadnessWeights().node_proximity_radius) -> float:
    return _node_proximity_term(crossings(as_controlpoints(c)), radius)


# --- totals ------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Assessment:
    value: float
    fingerprint: Optional[TopologyFingerprint] = None
    breakdown: Optional[ComponentBreakdown] = None


def _raw_components(
    normal: ControlPoints,
    found: Sequence[Crossing],
    w: BadnessWeights,
    ref: TopologyFingerprint,
    full: bool,
) -> dict[str, float]:
    raw = dict.fromkeys(COMPONENTS, 0.0)
    raw["angle"] = _angle_term(found)
    raw["bend"] = float(bending_energy_array(normal.segments).sum())
    raw["cross_sep"] = _separation_term(found, w.cross_sep_radius)
    if full or w.w_repel > 0:
        raw["repel"] = _repel_term(normal, found, w.repel_radius)
    raw["topology"] = _topology_term(found, ref, w.topology_penalty)
    if full or w.w_curvature_variation > 0:
        raw["curvature_variation"] = _curvature_variation_term(normal)
    if full or w.w_node_proximity > 0:
        raw["node_proximity"] = _node_proximity_term(found, w.node_proximity_radius)
    return raw


def _weighted(raw: dict[str, float], w: BadnessWeights) -> tuple[dict[str, float], float]:
    weighted = {name: getattr(w, f"w_{name}") * raw[name] for name in COMPONENTS}
    total = 0.0
    for name in COMPONENTS:
        total += weighted[name]
    return weighted, total


def component_breakdown(
    knot: Knot, w: Optional[BadnessWeights] = None, ref: Optional[TopologyFingerprint] = None
) -> ComponentBreakdown:
    """Raw and weighted value of every component; raises on degenerate geometry."""
    w = w or BadnessWeights()
    normal, _ = normalize(as_controlpoints(knot))
    found = crossings(normal)
    ref = ref if ref is not None else fingerprint_of(found)
    raw = _raw_components(normal, found, w, ref, full=True)
    weighted, total = _weighted(raw, w)
    return ComponentBreakdown(raw=ComponentValues(**raw), weighted=ComponentValues(**weighted), total=total)


def assess(
    knot: Knot,
    w: Optional[BadnessWeights] = None,
    ref: Optional[TopologyFingerprint] = None,
    *,
    full: bool = False,
) -> Assessment:
    """Badness plus the fingerprint it was computed with; never raises on bad geometry."""
    w = w or BadnessWeights()
    try:
        normal, _ = normalize(as_controlpoints(knot))
        found = crossings(normal)
        current = fingerprint_of(found)
        raw = _raw_components(normal, found, w, ref if ref is not None else current, full)
    except (KnotError, FloatingPointError, ZeroDivisionError) as exc:
        logger.debug("degenerate knot scored as sentinel: %s", exc)
        return Assessment(SENTINEL)
    weighted, total = _weighted(raw, w)
    if not math.isfinite(total):
        return Assessment(SENTINEL, current)
    breakdown = None
    if full:
        breakdown = ComponentBreakdown(raw=ComponentValues(**raw), weighted=ComponentValues(**weighted), total=total)
    return Assessment(min(total, SENTINEL), current, breakdown)


def badness(
    knot: Knot, w: Optional[BadnessWeights] = None, ref: Optional[TopologyFingerprint] = None
) -> float:
    """Weighted sum of all components on the normalized knot.

    ``ref`` defaults to the knot's own fingerprint, making the topology term 0.
    """
    return assess(knot, w, ref).value
