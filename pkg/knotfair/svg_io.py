"""SVG input and output.

Reading takes the first ``path`` element in document order (or the one
with a given id), composes the transforms of its ancestor groups and turns
the path data into an :class:`~knotfair.knot.InkscapePath`. Writing emits a
:class:`~knotfair.models.RenderDoc` through svgwrite with every number
formatted to six significant digits, so identical documents give identical
bytes.

Coordinates stay in SVG user units with y pointing down.
"""

from __future__ import annotations

import logging
import re
import xml.etree.ElementTree as ET
from pathlib import Path
from typing import Iterator, Optional

import numpy as np
import svgwrite
from svgpathtools import CubicBezier, Line, parse_path
from svgpathtools.parser import parse_transform

from .errors import IoFailure, MalformedPath, MalformedSvg, NoPathFound, OpenPath, UnsupportedCommand
from .knot import InkscapePath
from .models import RenderDoc

logger = logging.getLogger(__name__)

SVG_NS = "{http://www.w3.org/2000/svg}"
SKIPPED = {"defs", "clipPath", "mask", "symbol", "marker", "pattern", "metadata"}
COMMAND_RE = re.compile(r"[A-DF-Za-df-z]")
ALLOWED = set("MmCcLlHhVvZz")
CLOSURE_TOLERANCE = 1e-6  # relative to the path's bounding-box diagonal


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _walk(element: ET.Element, transform: np.ndarray) -> Iterator[tuple[ET.Element, np.ndarray]]:
    local = transform
    if element.get("transform"):
        local = transform @ parse_transform(element.get("transform"))
    if element.get("clip-path") or element.get("mask"):
        logger.warning("ignoring clip path/mask on <%s id=%s>", _local(element.tag), element.get("id"))
    if _local(element.tag) == "path":
        yield element, local
    for child in element:
        if _local(child.tag) in SKIPPED:
            continue
        yield from _walk(child, local)


def _parse_tree(source: Path | str) -> ET.ElementTree:
    try:
        return ET.parse(source)
    except ET.ParseError as exc:
        line = exc.position[0] if getattr(exc, "position", None) else None
        raise MalformedSvg(str(source), line, str(exc)) from exc
    except OSError as exc:
        raise IoFailure(f"cannot read {source}: {exc.strerror or exc}") from exc


def find_path(root: ET.Element, element_id: Optional[str] = None) -> tuple[str, np.ndarray]:
    """Path data and composed 3x3 transform of the selected path element."""
    for element, transform in _walk(root, np.identity(3)):
        if element_id is not None and element.get("id") != element_id:
            continue
        d = element.get("d")
        if d and d.strip():
            return d, transform
    if element_id is not None:
        raise NoPathFound(f"no path element with id '{element_id}'")
    raise NoPathFound("document contains no path element")


def path_points(d: str, transform: Optional[np.ndarray] = None) -> InkscapePath:
    """Turn path data into a closed control sequence (lines, including H/V, become straight cubics)."""
    unsupported = sorted(set(COMMAND_RE.findall(d)) - ALLOWED)
    if unsupported:
        raise UnsupportedCommand(f"unsupported path commands: {' '.join(unsupported)}")
    if len(re.findall(r"[Mm]", d)) != 1 or not d.lstrip().startswith(("M", "m")):
        raise MalformedPath("path data must hold exactly one subpath starting with a moveto")
    try:
        path = parse_path(d)
    except (ValueError, IndexError) as exc:
        raise MalformedPath(f"cannot parse path data: {exc}") from exc
    if len(path) == 0:
        raise MalformedPath("path data has no segments")

    controls: list[complex] = [path[0].start]
    for segment in path:
        if isinstance(segment, CubicBezier):
            controls.extend([segment.control1, segment.control2, segment.end])
        elif isinstance(segment, Line):
            step = segment.end - segment.start
            controls.extend([segment.start + step / 3.0, segment.start + 2.0 * step / 3.0, segment.end])
        else:  # pragma: no cover - excluded by the command check
            raise UnsupportedCommand(f"unsupported segment {type(segment).__name__}")
    points = np.array([[z.real, z.imag] for z in controls])

    diagonal = float(np.hypot(*np.ptp(points, axis=0)))
    if not re.search(r"[Zz]", d) and np.hypot(*(points[-1] - points[0])) > CLOSURE_TOLERANCE * diagonal:
        raise OpenPath("path is not closed (no Z and the ends do not meet)")
    points[-1] = points[0]

    if transform is not None:
        homogeneous = np.column_stack([points, np.ones(len(points))])
        points = (homogeneous @ np.asarray(transform, dtype=float).T)[:, :2]
    return InkscapePath(points)


def read_svg(file: Path | str, element_id: Optional[str] = None) -> InkscapePath:
    tree = _parse_tree(file)
    d, transform = find_path(tree.getroot(), element_id)
    logger.debug("read path from %s (%d characters)", file, len(d))
    return path_points(d, transform)


def read_svg_text(text: str, element_id: Optional[str] = None) -> InkscapePath:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        line = exc.position[0] if getattr(exc, "position", None) else None
        raise MalformedSvg("<request>", line, str(exc)) from exc
    d, transform = find_path(root, element_id)
    return path_points(d, transform)


# --- output ------------------------------------------------------------------


def fmt(value: float) -> str:
    text = format(float(value), ".6g")
    return "0" if text == "-0" else text


def path_data(segments, closed: bool) -> str:
    """Absolute M/C (and Z) commands for a chain of cubic pieces."""
    if not segments:
        return ""
    start = segments[0][0]
    parts = [f"M {fmt(start[0])},{fmt(start[1])}"]
    for piece in segments:
        controls = " ".join(f"{fmt(x)},{fmt(y)}" for x, y in piece[1:])
        parts.append(f"C {controls}")
    if closed:
        parts.append("Z")
    return " ".join(parts)


def to_drawing(doc: RenderDoc, filename: str = "knot.svg") -> svgwrite.Drawing:
    drawing = svgwrite.Drawing(filename, profile="full", debug=False)
    if doc.view_box is not None:
        x, y, width, height = doc.view_box
        drawing.attribs["viewBox"] = " ".join(fmt(v) for v in (x, y, width, height))
        drawing.attribs["width"] = fmt(width)
        drawing.attribs["height"] = fmt(height)
        if doc.background:
            drawing.add(
                drawing.rect(insert=(fmt(x), fmt(y)), size=(fmt(width), fmt(height)), fill=doc.background)
            )
    for path in doc.paths:
        drawing.add(
            drawing.path(
                d=path_data(path.segments, path.closed),
                fill="none",
                stroke=path.stroke,
                stroke_width=fmt(path.stroke_width),
                stroke_linecap="butt",
                stroke_linejoin="round",
                class_=path.role,
            )
        )
    for line in doc.lines:
        drawing.add(
            drawing.line(
                start=(fmt(line.start[0]), fmt(line.start[1])),
                end=(fmt(line.end[0]), fmt(line.end[1])),
                stroke=line.stroke,
                stroke_width=fmt(line.stroke_width),
                class_=line.role,
            )
        )
    for circle in doc.circles:
        drawing.add(
            drawing.circle(
                center=(fmt(circle.center[0]), fmt(circle.center[1])),
                r=fmt(circle.radius),
                stroke=circle.stroke,
                fill=circle.fill,
                stroke_width=fmt(circle.stroke_width),
                class_=circle.role,
            )
        )
    for label in doc.labels:
        drawing.add(
            drawing.text(
                label.text,
                insert=(fmt(label.position[0]), fmt(label.position[1])),
                font_size=fmt(label.font_size),
                fill=label.fill,
                text_anchor="middle",
                dominant_baseline="central",
                class_=label.role,
            )
        )
    return drawing


def to_svg_string(doc: RenderDoc) -> str:
    return to_drawing(doc).tostring()


def write_svg(doc: RenderDoc, file: Path | str) -> Path:
    path = Path(file)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text('<?xml version="1.0" encoding="utf-8" ?>\n' + to_svg_string(doc) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc.strerror or exc}") from exc
    logger.debug("wrote %s", path)
    return path
