"""Diagram construction.

:func:`knotplot2` draws the working view of a path: the curve, optional
handles, curvature glyphs and labels. :func:`knotplot` draws the finished
knot, interrupting each understrand around its crossing. Both return a
:class:`~knotfair.models.RenderDoc`; :mod:`knotfair.svg_io` turns it into
SVG.
"""

from __future__ import annotations

import colorsys
import logging
from bisect import bisect_right
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bezier import (
    Crossing,
    CubicSegment,
    arc_length,
    arc_length_array,
    curvature,
    derivatives,
    evaluate,
    parameter_at_length,
    segment_between,
)
from .errors import DegenerateSpeed, OverUnderMismatch
from .knot import ControlPoints, crossings, node_label, segment_number
from .models import (
    CirclePrimitive,
    GapPrimitive,
    LabelPrimitive,
    LinePrimitive,
    OverUnderSpec,
    PathPrimitive,
    RenderDoc,
    RenderOptions,
)

logger = logging.getLogger(__name__)

BACKGROUND = "white"
LABEL_SIZE = 12.0
NODE_CLEARANCE = 0.02  # fraction of a segment's length kept drawn at each end


def _pieces(points: np.ndarray) -> list[tuple[float, float]]:
    return [(float(x), float(y)) for x, y in points]


def segment_color(index: int, n: int) -> str:
    """Rainbow stroke for the 0-based segment ``index`` of ``n``."""
    r, g, b = colorsys.hsv_to_rgb(index / n, 0.9, 0.85)
    return "#{:02x}{:02x}{:02x}".format(round(r * 255), round(g * 255), round(b * 255))


def _outward(c: ControlPoints, seg: CubicSegment, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Point at ``t`` and the unit normal pointing away from the node centroid."""
    point = np.array(evaluate(seg, t))
    d1, _ = derivatives(seg, t)
    normal = np.array([-d1.y, d1.x])
    norm = float(np.hypot(*normal))
    if norm == 0.0:
        normal = point - c.centroid()
        norm = float(np.hypot(*normal)) or 1.0
    normal = normal / norm
    if float(np.dot(normal, point - c.centroid())) < 0:
        normal = -normal
    return point, normal


def _handles(c: ControlPoints, opts: RenderOptions, doc: RenderDoc) -> None:
    nodes = c.segments[:, 0]
    forward = c.segments[:, 1]
    backward = np.roll(c.segments[:, 2], 1, axis=0)
    radius = 1.5 * opts.stroke_width
    for node, handles in zip(nodes, zip(forward, backward)):
        for handle in handles:
            doc.lines.append(LinePrimitive(start=tuple(node), end=tuple(handle)))
            doc.circles.append(CirclePrimitive(center=tuple(handle), radius=radius))


def _curvature_glyphs(c: ControlPoints, opts: RenderOptions, doc: RenderDoc) -> None:
    lengths = arc_length_array(c.segments)
    total = float(lengths.sum())
    starts = np.concatenate([[0.0], np.cumsum(lengths)[:-1]]).tolist()
    count = opts.curvature_samples
    for k in range(count):
        s = total * k / count
        index = min(bisect_right(starts, s) - 1, c.n - 1)
        seg = c.segment(index)
        t = parameter_at_length(seg, s - starts[index])
        try:
            kappa = curvature(seg, t) * total
        except DegenerateSpeed:
            logger.debug("no curvature glyph at segment %d t=%.4f", index + 1, t)
            continue
        doc.circles.append(
            CirclePrimitive(
                center=tuple(evaluate(seg, t)),
                radius=opts.curvature_scale * kappa,
                stroke="red",
                role="curvature",
            )
        )


def _labels(c: ControlPoints, opts: RenderOptions, doc: RenderDoc) -> None:
    offset = LABEL_SIZE + 2.0 * opts.stroke_width
    if opts.show_labels:
        for index in range(c.n):
            point, normal = _outward(c, c.segment(index), 0.5)
            text = str(segment_number(c, index + 1))
            doc.labels.append(LabelPrimitive(position=tuple(point + offset * normal), text=text, font_size=LABEL_SIZE))
    if opts.show_nodes:
        for index in range(c.n):
            point, normal = _outward(c, c.segment(index), 0.0)
            doc.circles.append(
                CirclePrimitive(center=tuple(point), radius=opts.stroke_width, fill="blue", stroke="blue", role="node")
            )
            doc.labels.append(
                LabelPrimitive(
                    position=tuple(point + offset * normal),
                    text=str(node_label(c, index + 1)),
                    font_size=LABEL_SIZE,
                    fill="blue",
                    role="node",
                )
            )


def _view_box(doc: RenderDoc, margin: float) -> tuple[float, float, float, float]:
    points: list[tuple[float, float]] = []
    for path in doc.paths:
        for piece in path.segments:
            points.extend(piece)
    for line in doc.lines:
        points.extend([line.start, line.end])
    for circle in doc.circles:
        x, y = circle.center
        points.extend([(x - circle.radius, y - circle.radius), (x + circle.radius, y + circle.radius)])
    for label in doc.labels:
        x, y = label.position
        points.extend([(x - label.font_size, y - label.font_size), (x + label.font_size, y + label.font_size)])
    if not points:
        return (0.0, 0.0, 1.0, 1.0)
    arr = np.array(points)
    lo = arr.min(axis=0) - margin
    hi = arr.max(axis=0) + margin
    return (float(lo[0]), float(lo[1]), float(hi[0] - lo[0]), float(hi[1] - lo[1]))


def _decorate(c: ControlPoints, opts: RenderOptions, doc: RenderDoc) -> RenderDoc:
    if opts.show_handles:
        _handles(c, opts, doc)
    if opts.show_curvature:
        _curvature_glyphs(c, opts, doc)
    _labels(c, opts, doc)
    doc.view_box = _view_box(doc, opts.margin)
    doc.background = BACKGROUND
    return doc


def knotplot2(c: ControlPoints, opts: Optional[RenderOptions] = None) -> RenderDoc:
    """The closed path with optional handles, curvature glyphs and numbering."""
    opts = opts or RenderOptions()
    doc = RenderDoc()
    if opts.rainbow:
        for index in range(c.n):
            doc.paths.append(
                PathPrimitive(
                    segments=[_pieces(c.segments[index])],
                    stroke=segment_color(index, c.n),
                    stroke_width=opts.stroke_width,
                )
            )
    else:
        doc.paths.append(
            PathPrimitive(
                segments=[_pieces(piece) for piece in c.segments], closed=True, stroke_width=opts.stroke_width
            )
        )
    return _decorate(c, opts, doc)


# --- finished diagram --------------------------------------------------------


def match_rows(found: list[Crossing], ou: OverUnderSpec) -> list[tuple[tuple[int, int], Crossing]]:
    """Pair each over/under row with the crossing of the same two segments.

    Several crossings of one segment pair are taken in parameter order along
    the lower-numbered segment, as are the rows naming that pair.
    """
    by_pair: dict[tuple[int, int], list[Crossing]] = {}
    for crossing in found:
        by_pair.setdefault(crossing.pair, []).append(crossing)
    rows_by_pair: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for row in ou.rows:
        rows_by_pair.setdefault((min(row), max(row)), []).append(tuple(row))

    matched: list[tuple[tuple[int, int], Crossing]] = []
    stray_rows: list[tuple[int, int]] = []
    stray_crossings: list[tuple[int, int]] = []
    for pair in sorted(set(by_pair) | set(rows_by_pair)):
        here = sorted(by_pair.get(pair, []), key=lambda x: x.t_a)
        rows = rows_by_pair.get(pair, [])
        matched.extend(zip(rows, here))
        stray_rows.extend(rows[len(here):])
        stray_crossings.extend(x.pair for x in here[len(rows):])
    if stray_rows or stray_crossings:
        raise OverUnderMismatch(stray_rows, stray_crossings)
    return matched


@dataclass
class _Break:
    segment: int  # 0-based
    over: int
    center: float  # arc length from the segment start
    lo: float
    hi: float


def _breaks(c: ControlPoints, matched, gap: float, stroke_width: float) -> dict[int, list[_Break]]:
    """Arc-length intervals to leave undrawn, grouped by 0-based under segment."""
    lengths = arc_length_array(c.segments)
    grouped: dict[int, list[_Break]] = {}
    for (over, under), crossing in matched:
        index = under - 1
        t = crossing.t_a if crossing.seg_a == under else crossing.t_b
        seg = c.segment(index)
        length = float(lengths[index])
        clearance = NODE_CLEARANCE * length
        center = min(max(arc_length(seg, 0.0, t), clearance), length - clearance)
        lo = max(center - gap, clearance)
        hi = min(center + gap, length - clearance)
        grouped.setdefault(index, []).append(_Break(index, over, center, lo, hi))

    for found in grouped.values():
        found.sort(key=lambda b: b.center)
        for first, second in zip(found, found[1:]):
            if first.hi < second.lo:
                continue
            middle = 0.5 * (first.center + second.center)
            spacing = min(0.5 * stroke_width, 0.25 * (second.center - first.center))
            first.hi = max(first.center, min(first.hi, middle - spacing))
            second.lo = min(second.center, max(second.lo, middle + spacing))
    return grouped


def knotplot(c: ControlPoints, ou: Optional[OverUnderSpec] = None, opts: Optional[RenderOptions] = None) -> RenderDoc:
    """The finished diagram: every understrand is broken around its crossing."""
    opts = opts or RenderOptions()
    ou = ou or OverUnderSpec()
    matched = match_rows(crossings(c), ou)
    doc = RenderDoc()
    if not matched:
        doc.paths.append(
            PathPrimitive(
                segments=[_pieces(piece) for piece in c.segments], closed=True, stroke_width=opts.stroke_width
            )
        )
        return _decorate(c, opts, doc)

    grouped = _breaks(c, matched, opts.gap, opts.stroke_width)
    # Drawn intervals per segment in parameter space, then chained into runs.
    drawn: list[list[tuple[float, float]]] = []
    for index in range(c.n):
        seg = c.segment(index)
        intervals: list[tuple[float, float]] = []
        cursor = 0.0
        for brk in grouped.get(index, []):
            t_lo = parameter_at_length(seg, brk.lo)
            t_hi = parameter_at_length(seg, brk.hi)
            doc.gaps.append(
                GapPrimitive(
                    segment=index + 1,
                    over=brk.over,
                    t_start=t_lo,
                    t_end=t_hi,
                    center=tuple(evaluate(seg, parameter_at_length(seg, brk.center))),
                    length=brk.hi - brk.lo,
                )
            )
            intervals.append((cursor, t_lo))
            cursor = t_hi
        intervals.append((cursor, 1.0))
        drawn.append(intervals)

    # Start right after the first break so every run is a single open path.
    first = min(grouped)
    order = [(first, k) for k in range(1, len(drawn[first]))]
    order += [(index % c.n, k) for index in range(first + 1, first + c.n) for k in range(len(drawn[index % c.n]))]
    order.append((first, 0))

    runs: list[list[list[tuple[float, float]]]] = []
    current: list[list[tuple[float, float]]] = []
    for index, k in order:
        t0, t1 = drawn[index][k]
        if k > 0 and current:
            runs.append(current)
            current = []
        if t1 > t0:
            current.append(_pieces(segment_between(c.segment(index), t0, t1).points))
    if current:
        runs.append(current)
    for run in runs:
        doc.paths.append(PathPrimitive(segments=run, closed=False, stroke_width=opts.stroke_width))
    logger.debug("knotplot: %d crossings, %d strands", len(matched), len(runs))
    return _decorate(c, opts, doc)
