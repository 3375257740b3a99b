import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from knotfair.bezier import arc_length, evaluate
from knotfair.errors import OverUnderMismatch
from knotfair.fixtures import fixture_path
from knotfair.knot import crossings, to_controlpoints
from knotfair.models import OverUnderSpec, RenderOptions
from knotfair.render import knotplot, knotplot2, match_rows, segment_color
from knotfair.svg_io import to_svg_string
from knotfair.symmetry import symmetrize

from conftest import circle_minobj

UNDER_76 = {1, 11, 3, 15, 6, 8, 13}


def _tags(doc, name):
    root = ET.fromstring(to_svg_string(doc))
    return [el for el in root.iter() if el.tag.rsplit("}", 1)[-1] == name]


def test_plain_path(c76):
    doc = knotplot2(c76)
    (path,) = doc.paths
    assert path.closed
    assert len(path.segments) == 16
    assert doc.background == "white"
    assert not doc.lines and not doc.circles and not doc.labels


def test_view_box_covers_the_control_points(c76):
    doc = knotplot2(c76, RenderOptions(margin=20.0))
    x, y, width, height = doc.view_box
    points = c76.segments.reshape(-1, 2)
    assert x == pytest.approx(points[:, 0].min() - 20.0)
    assert y == pytest.approx(points[:, 1].min() - 20.0)
    assert x + width == pytest.approx(points[:, 0].max() + 20.0)
    assert y + height == pytest.approx(points[:, 1].max() + 20.0)


def test_handles(c76):
    doc = knotplot2(c76, RenderOptions(show_handles=True))
    assert len(doc.lines) == 32
    assert len([c for c in doc.circles if c.role == "handle"]) == 32
    assert tuple(doc.lines[0].start) == pytest.approx(tuple(c76.segments[0, 0]))
    assert tuple(doc.lines[0].end) == pytest.approx(tuple(c76.segments[0, 1]))


def test_labels_and_nodes(c76):
    doc = knotplot2(c76, RenderOptions(show_labels=True, show_nodes=True))
    segment_labels = [label.text for label in doc.labels if label.role == "segment"]
    node_labels = [label.text for label in doc.labels if label.role == "node"]
    assert segment_labels == [str(i) for i in range(1, 17)]
    assert node_labels == segment_labels
    assert len([c for c in doc.circles if c.role == "node"]) == 16
    assert len(_tags(doc, "text")) == 32


def test_curvature_glyphs_on_a_circle():
    c = to_controlpoints(circle_minobj(12, radius=50.0))
    doc = knotplot2(c, RenderOptions(show_curvature=True))
    glyphs = [circle for circle in doc.circles if circle.role == "curvature"]
    assert len(glyphs) == RenderOptions().curvature_samples
    # curvature 1/r times length 2 pi r
    assert all(glyph.radius == pytest.approx(2 * math.pi, rel=1e-3) for glyph in glyphs)
    assert all(math.hypot(*glyph.center) == pytest.approx(50.0, rel=1e-3) for glyph in glyphs)


def test_rainbow(c76):
    doc = knotplot2(c76, RenderOptions(rainbow=True))
    assert len(doc.paths) == 16
    assert not any(path.closed for path in doc.paths)
    assert len({path.stroke for path in doc.paths}) == 16
    assert segment_color(0, 16) == "#d91616"


def test_match_rows(c76, ou76):
    matched = match_rows(crossings(c76), ou76)
    assert len(matched) == 7
    for (over, under), crossing in matched:
        assert crossing.pair == (min(over, under), max(over, under))


def test_understrand_breaks(c76, ou76):
    doc = knotplot(c76, ou76, RenderOptions(gap=15.0))
    assert len(doc.gaps) == 7
    assert {gap.segment for gap in doc.gaps} == UNDER_76
    assert {(gap.over, gap.segment) for gap in doc.gaps} == set(ou76.rows)
    assert len(doc.paths) == 7
    assert not any(path.closed for path in doc.paths)
    assert len(_tags(doc, "path")) == 7


def test_break_lengths_and_centers(c76, ou76):
    doc = knotplot(c76, ou76, RenderOptions(gap=15.0))
    points = {x.pair: x.point for x in crossings(c76)}
    for gap in doc.gaps:
        seg = c76.segment(gap.segment - 1)
        assert gap.length == pytest.approx(30.0)
        assert arc_length(seg, gap.t_start, gap.t_end) == pytest.approx(30.0, rel=1e-6)
        pair = (min(gap.over, gap.segment), max(gap.over, gap.segment))
        assert tuple(gap.center) == pytest.approx(tuple(points[pair]), abs=1e-6)
        assert tuple(evaluate(seg, gap.t_start)) != pytest.approx(tuple(evaluate(seg, gap.t_end)))


def test_zero_gap_still_splits_strands(c76, ou76):
    doc = knotplot(c76, ou76, RenderOptions(gap=0.0))
    assert len(doc.gaps) == 7
    assert all(gap.length == pytest.approx(0.0, abs=1e-9) for gap in doc.gaps)
    assert len(doc.paths) == 7


def test_missing_rows(c76):
    with pytest.raises(OverUnderMismatch) as info:
        knotplot(c76, OverUnderSpec(rows=((12, 1),)))
    assert (2, 11) in info.value.crossings
    assert len(info.value.crossings) == 6


def test_row_without_crossing(c76, ou76):
    extra = OverUnderSpec(rows=ou76.rows + ((1, 5),))
    with pytest.raises(OverUnderMismatch) as info:
        knotplot(c76, extra)
    assert info.value.rows == [(1, 5)]
    assert "(1,5)" in str(info.value)


def test_unknot_has_no_breaks(unknot):
    doc = knotplot(to_controlpoints(unknot))
    (path,) = doc.paths
    assert path.closed
    assert doc.gaps == []


def test_symmetric_figure_eight(k41, spec41):
    c = to_controlpoints(symmetrize(k41.centered(), spec41))
    doc = knotplot(c, OverUnderSpec.from_file(fixture_path("4_1.overunder.json")))
    assert {gap.segment for gap in doc.gaps} == {7, 5, 9, 11}
    assert len(doc.paths) == 4
    centers = np.array([gap.center for gap in doc.gaps])
    # crossings come in mirror pairs or sit on the axis
    mirrored = centers * (-1.0, 1.0)
    for point in mirrored:
        assert np.min(np.hypot(*(centers - point).T)) < 1e-6
