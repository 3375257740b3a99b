"""Knot representations and the conversions between them.

* :class:`InkscapePath` - the raw closed control sequence
  ``[n0, h0+, h1-, n1, h1+, ..., h0-, n0]`` as read from SVG.
* :class:`MinObj` - nodes and forward handles only; the backward handle of
  node ``i`` is always ``2*n_i - h_i``.
* :class:`ControlPoints` - one cubic per segment, ready for geometry.
* :class:`KnotVec` - the flat optimizer vector: all node coordinates, then
  all forward-handle coordinates (``x, y`` per point).

Indices are 0-based internally; segment and node labels shown to users are
1-based (segment ``i`` runs from node ``i`` to node ``i + 1``).
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bezier import DEFAULT_INTERSECT, Crossing, CubicSegment, IntersectOptions, intersect
from .errors import BadLength, IoFailure, MalformedPath, OutOfRange, TangentialContact
from .models import TopologyFingerprint

logger = logging.getLogger(__name__)

HANDLE_TOLERANCE = 0.005  # fraction of the bounding-box diagonal
KNOTVEC_HEADER = "knotvec n="


def _frozen(array, shape_tail: tuple[int, ...], what: str) -> np.ndarray:
    arr = np.array(array, dtype=float)
    if arr.ndim != len(shape_tail) + 1 or arr.shape[1:] != shape_tail:
        raise MalformedPath(f"{what} has shape {arr.shape}, expected (*, {', '.join(map(str, shape_tail))})")
    arr.setflags(write=False)
    return arr


def _diagonal(points: np.ndarray) -> float:
    span = points.max(axis=0) - points.min(axis=0)
    return float(np.hypot(*span))


@dataclass(frozen=True, slots=True, eq=False)
class InkscapePath:
    points: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", _frozen(self.points, (2,), "inkscape path"))
        if not np.all(np.isfinite(self.points)):
            raise MalformedPath("inkscape path has non-finite coordinates")

    @property
    def node_count(self) -> int:
        return (len(self.points) - 1) // 3

    def nodes(self) -> np.ndarray:
        return self.points[0:-1:3]

    def forward_handles(self) -> np.ndarray:
        return self.points[1::3]

    def backward_handles(self) -> np.ndarray:
        return np.roll(self.points[2::3], 1, axis=0)

    def segments(self) -> np.ndarray:
        """Direct Bezier interpolation of the raw sequence, shape ``(n, 4, 2)``."""
        pts = self.points
        return np.stack([pts[0:-1:3], pts[1::3], pts[2::3], pts[3::3]], axis=1)

    def diagonal(self) -> float:
        return _diagonal(self.points)


@dataclass(frozen=True, slots=True, eq=False)
class MinObj:
    nodes: np.ndarray
    handles: np.ndarray

    def __post_init__(self) -> None:
        nodes = _frozen(self.nodes, (2,), "nodes")
        handles = _frozen(self.handles, (2,), "handles")
        if nodes.shape != handles.shape:
            raise MalformedPath(f"{len(nodes)} nodes but {len(handles)} handles")
        if len(nodes) < 3:
            raise MalformedPath(f"a knot needs at least 3 nodes, got {len(nodes)}")
        if not (np.all(np.isfinite(nodes)) and np.all(np.isfinite(handles))):
            raise MalformedPath("knot has non-finite coordinates")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "handles", handles)

    @property
    def n(self) -> int:
        return len(self.nodes)

    def backward_handles(self) -> np.ndarray:
        return 2.0 * self.nodes - self.handles

    def centroid(self) -> np.ndarray:
        return self.nodes.mean(axis=0)

    def translated(self, offset) -> "MinObj":
        offset = np.asarray(offset, dtype=float)
        return MinObj(self.nodes + offset, self.handles + offset)

    def centered(self) -> "MinObj":
        """Translate so the node centroid sits at the origin."""
        return self.translated(-self.centroid())

    def transformed(self, matrix, offset=(0.0, 0.0)) -> "MinObj":
        matrix = np.asarray(matrix, dtype=float)
        offset = np.asarray(offset, dtype=float)
        return MinObj(self.nodes @ matrix.T + offset, self.handles @ matrix.T + offset)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MinObj):
            return NotImplemented
        return np.array_equal(self.nodes, other.nodes) and np.array_equal(self.handles, other.handles)


@dataclass(frozen=True, slots=True, eq=False)
class ControlPoints:
    segments: np.ndarray

    def __post_init__(self) -> None:
        segs = _frozen(self.segments, (4, 2), "control points")
        if len(segs) < 1:
            raise MalformedPath("a knot needs at least one segment")
        gaps = segs[:, 3] != np.roll(segs[:, 0], -1, axis=0)
        if np.any(gaps):
            index = int(np.argwhere(gaps)[0][0])
            raise MalformedPath(f"segment {index + 1} does not end where the next one starts")
        object.__setattr__(self, "segments", segs)

    @property
    def n(self) -> int:
        return len(self.segments)

    def segment(self, index: int) -> CubicSegment:
        """Segment by 0-based index."""
        return CubicSegment(self.segments[index])

    def nodes(self) -> np.ndarray:
        return self.segments[:, 0]

    def centroid(self) -> np.ndarray:
        return self.nodes().mean(axis=0)

    def transformed(self, matrix=None, offset=(0.0, 0.0), scale: float = 1.0) -> "ControlPoints":
        segs = self.segments * scale
        if matrix is not None:
            segs = segs @ np.asarray(matrix, dtype=float).T
        return ControlPoints(segs + np.asarray(offset, dtype=float))

    def continuity_defect(self) -> float:
        """Largest angle (radians) between incoming and outgoing tangents at any node."""
        incoming = self.segments[:, 3] - self.segments[:, 2]
        outgoing = np.roll(self.segments[:, 1] - self.segments[:, 0], -1, axis=0)
        cross = incoming[:, 0] * outgoing[:, 1] - incoming[:, 1] * outgoing[:, 0]
        dot = (incoming * outgoing).sum(axis=1)
        return float(np.max(np.arctan2(np.abs(cross), dot)))


@dataclass(frozen=True, slots=True, eq=False)
class KnotVec:
    values: np.ndarray
    n: int

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float).ravel()
        if len(values) % 4 or len(values) != 4 * self.n:
            raise BadLength(f"knot vector of length {len(values)} does not hold {self.n} nodes")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, values) -> "KnotVec":
        values = np.asarray(values, dtype=float).ravel()
        if len(values) % 4:
            raise BadLength(f"knot vector length {len(values)} is not a multiple of 4")
        return cls(values, len(values) // 4)

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KnotVec):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.values, other.values)


# --- conversions -------------------------------------------------------------


def to_minobj(p: InkscapePath, tolerance: float = HANDLE_TOLERANCE) -> MinObj:
    """Drop the closing node and backward handles, averaging small handle asymmetries."""
    pts = p.points
    if len(pts) < 10 or (len(pts) - 1) % 3:
        raise MalformedPath(f"control sequence of length {len(pts)} is not 3n+1 with n >= 3")
    tol = tolerance * p.diagonal()
    if np.hypot(*(pts[-1] - pts[0])) > tol:
        raise MalformedPath("path does not close on its first node")
    nodes = p.nodes()
    forward = p.forward_handles()
    mirrored = 2.0 * nodes - p.backward_handles()
    asymmetry = np.hypot(*(forward - mirrored).T)
    worst = int(np.argmax(asymmetry))
    if asymmetry[worst] > tol:
        raise MalformedPath(
            f"handles of node {worst + 1} are not symmetric "
            f"(off by {asymmetry[worst]:.4g}, tolerance {tol:.4g})"
        )
    return MinObj(nodes, 0.5 * (forward + mirrored))


def to_inkscape(m: MinObj) -> InkscapePath:
    points = np.empty((3 * m.n + 1, 2))
    points[0:-1:3] = m.nodes
    points[1::3] = m.handles
    points[2::3] = np.roll(m.backward_handles(), -1, axis=0)
    points[-1] = m.nodes[0]
    return InkscapePath(points)


def to_controlpoints(m: MinObj) -> ControlPoints:
    ahead_nodes = np.roll(m.nodes, -1, axis=0)
    ahead_back = np.roll(m.backward_handles(), -1, axis=0)
    return ControlPoints(np.stack([m.nodes, m.handles, ahead_back, ahead_nodes], axis=1))


def minobj_from_controlpoints(c: ControlPoints) -> MinObj:
    return MinObj(c.segments[:, 0], c.segments[:, 1])


def to_knotvec(m: MinObj) -> KnotVec:
    return KnotVec(np.concatenate([m.nodes.ravel(), m.handles.ravel()]), m.n)


def from_knotvec(v: KnotVec) -> MinObj:
    half = 2 * v.n
    return MinObj(v.values[:half].reshape(v.n, 2), v.values[half:].reshape(v.n, 2))


def segment_number(c: ControlPoints, seg_index: int) -> int:
    """User-facing label of the 1-based segment index (labels run 1..n in path order)."""
    if not 1 <= seg_index <= c.n:
        raise OutOfRange(f"segment {seg_index} is outside 1..{c.n}")
    return int(seg_index)


def node_label(m: MinObj | ControlPoints, node_index: int) -> int:
    if not 1 <= node_index <= m.n:
        raise OutOfRange(f"node {node_index} is outside 1..{m.n}")
    return int(node_index)


# --- crossings ---------------------------------------------------------------


def candidate_pairs(c: ControlPoints) -> list[tuple[int, int]]:
    """0-based segment pairs whose control-polygon boxes overlap."""
    lo = c.segments.min(axis=1)
    hi = c.segments.max(axis=1)
    i, j = np.triu_indices(c.n, 1)
    overlap = np.all(lo[i] <= hi[j], axis=1) & np.all(lo[j] <= hi[i], axis=1)
    return list(zip(i[overlap].tolist(), j[overlap].tolist()))


def crossings(
    c: ControlPoints,
    opts: IntersectOptions = DEFAULT_INTERSECT,
    *,
    threads: int = 1,
    allow_tangential: bool = False,
) -> list[Crossing]:
    """Every self-intersection of the knot, ordered by (seg_a, t_a).

    Adjacent segments are tested too; their shared node is excluded.
    """
    segments = [c.segment(i) for i in range(c.n)]
    pairs = candidate_pairs(c)

    def work(pair: tuple[int, int]) -> list[Crossing]:
        i, j = pair
        return intersect(segments[i], segments[j], opts, labels=(i + 1, j + 1))

    if threads > 1 and len(pairs) > 4 * threads:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, pairs))
    else:
        results = [work(pair) for pair in pairs]
    found = sorted((x for batch in results for x in batch), key=lambda x: (x.seg_a, x.t_a, x.seg_b))
    if not allow_tangential:
        for crossing in found:
            if crossing.tangential:
                raise TangentialContact(
                    f"segments {crossing.seg_a} and {crossing.seg_b} touch tangentially "
                    f"near ({crossing.point.x:.6g}, {crossing.point.y:.6g})"
                )
    return found


def fingerprint_of(found: list[Crossing]) -> TopologyFingerprint:
    return TopologyFingerprint(
        crossing_count=len(found),
        crossing_pairs=tuple(sorted({x.pair for x in found})),
    )


def fingerprint(c: ControlPoints, *, threads: int = 1) -> TopologyFingerprint:
    return fingerprint_of(crossings(c, threads=threads))


# --- KnotVec text format -----------------------------------------------------


def format_knotvec(v: KnotVec) -> str:
    lines = [f"{KNOTVEC_HEADER}{v.n}"]
    lines.extend(repr(float(value)) for value in v.values)
    return "\n".join(lines) + "\n"


def parse_knotvec(text: str, source: str = "<string>") -> KnotVec:
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines or not lines[0].startswith(KNOTVEC_HEADER):
        raise MalformedPath(f"{source}: missing '{KNOTVEC_HEADER}<n>' header")
    try:
        n = int(lines[0][len(KNOTVEC_HEADER):])
        values = [float(line) for line in lines[1:]]
    except ValueError as exc:
        raise MalformedPath(f"{source}: {exc}") from exc
    return KnotVec(np.array(values), n)


def write_knotvec(v: KnotVec, path: Path | str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(format_knotvec(v))
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc.strerror or exc}") from exc
    logger.debug("wrote knot vector n=%d to %s", v.n, path)
    return path


def read_knotvec(path: Path | str) -> KnotVec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc.strerror or exc}") from exc
    return parse_knotvec(text, str(path))
