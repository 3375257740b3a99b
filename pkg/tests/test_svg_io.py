import xml.etree.ElementTree as ET

import numpy as np
import pytest

from knotfair.bezier import curvature_array
from knotfair.errors import IoFailure, MalformedPath, MalformedSvg, NoPathFound, OpenPath, UnsupportedCommand
from knotfair.fixtures import fixture_path
from knotfair.knot import to_controlpoints, to_minobj
from knotfair.models import PathPrimitive, RenderDoc
from knotfair.render import knotplot2
from knotfair.svg_io import path_points, read_svg, read_svg_text, to_svg_string, write_svg

from conftest import svg_text, write_svg_file

CIRCLE_D = (
    "M 1,0 C 1,0.55228 0.55228,1 0,1 C -0.55228,1 -1,0.55228 -1,0 "
    "C -1,-0.55228 -0.55228,-1 0,-1 C 0.55228,-1 1,-0.55228 1,0 Z"
)


def test_7_6_fixture():
    p = read_svg(fixture_path("7_6_first_draft.svg"))
    assert p.node_count == 16
    assert tuple(p.points[0]) == pytest.approx((-98.81963, 339.81898), abs=1e-6)
    assert np.array_equal(p.points[-1], p.points[0])


@pytest.mark.parametrize(
    "name, nodes",
    [("4_1_first_draft.svg", 11), ("5_1_first_draft.svg", 20), ("unknot.svg", 5), ("7_6_first_draft.svg", 16)],
)
def test_fixtures_are_valid_knots(name, nodes):
    m = to_minobj(read_svg(fixture_path(name)))
    assert m.n == nodes


def test_square_of_lines_becomes_straight_cubics(tmp_path):
    path = write_svg_file(tmp_path, '<path d="M 0,0 L 10,0 L 10,10 L 0,10 Z"/>')
    p = read_svg(path)
    assert p.node_count == 4
    assert tuple(p.points[1]) == pytest.approx((10 / 3, 0.0))
    assert tuple(p.points[2]) == pytest.approx((20 / 3, 0.0))
    kappa = curvature_array(p.segments(), np.linspace(0.0, 1.0, 7))
    assert np.allclose(kappa, 0.0)


def test_relative_commands_and_separators():
    absolute = path_points(CIRCLE_D)
    relative = path_points(
        "m 1 0 c 0 0.55228 -0.44772 1 -1 1 c -0.55228 0 -1 -0.44772 -1 -1 "
        "c 0 -0.55228 0.44772 -1 1 -1 c 0.55228 0 1 0.44772 1 1 z"
    )
    squeezed = path_points(CIRCLE_D.replace(", ", ",").replace(" ", "  ").replace(",", " , "))
    assert np.allclose(relative.points, absolute.points, atol=1e-12)
    assert np.allclose(squeezed.points, absolute.points)


def test_nested_group_transforms(tmp_path):
    body = (
        '<g transform="translate(10,20)"><g transform="scale(2)">'
        '<path d="M 1,1 L 3,1 L 3,3 Z"/></g></g>'
    )
    p = read_svg(write_svg_file(tmp_path, body))
    assert tuple(p.points[0]) == pytest.approx((12.0, 22.0))
    assert tuple(p.points[3]) == pytest.approx((16.0, 22.0))


def test_first_path_in_document_order_and_by_id():
    body = f'<defs><path id="hidden" d="M 0,0 L 1,0 L 0,1 Z"/></defs><path id="a" d="{CIRCLE_D}"/><path id="b" d="M 0,0 L 5,0 L 0,5 Z"/>'
    assert read_svg_text(svg_text(body)).node_count == 4
    assert read_svg_text(svg_text(body), element_id="b").node_count == 3
    with pytest.raises(NoPathFound, match="zzz"):
        read_svg_text(svg_text(body), element_id="zzz")


def test_rect_only_has_no_path(tmp_path):
    with pytest.raises(NoPathFound):
        read_svg(write_svg_file(tmp_path, '<rect x="0" y="0" width="5" height="5"/>'))


@pytest.mark.parametrize("d", ["M 0,0 A 5,5 0 0 1 10,0 Z", "M 0,0 Q 5,5 10,0 Z", "M 0,0 S 5,5 10,0 Z", "M 0,0 T 5,5 Z"])
def test_unsupported_commands(d):
    with pytest.raises(UnsupportedCommand):
        path_points(d)


def test_exponent_is_not_a_command():
    p = path_points("M 0,0 L 1e1,0 L 10,1.0E1 Z")
    assert tuple(p.points[3]) == pytest.approx((10.0, 0.0))


def test_open_path():
    with pytest.raises(OpenPath):
        path_points("M 0,0 L 10,0 L 10,10")
    closed_by_hand = path_points("M 0,0 L 10,0 L 10,10 L 0,0")
    assert closed_by_hand.node_count == 3


def test_two_subpaths_are_rejected():
    with pytest.raises(MalformedPath):
        path_points("M 0,0 L 1,0 L 0,1 Z M 5,5 L 6,5 L 5,6 Z")


def test_malformed_xml_names_the_line(tmp_path):
    path = tmp_path / "broken.svg"
    path.write_text('<svg xmlns="http://www.w3.org/2000/svg">\n<path d="M 0,0 L 1,0 Z"\n</svg>\n')
    with pytest.raises(MalformedSvg) as info:
        read_svg(path)
    assert info.value.line is not None
    assert str(path) in str(info.value)


def test_missing_file(tmp_path):
    with pytest.raises(IoFailure):
        read_svg(tmp_path / "nope.svg")


def test_empty_document_has_no_shapes():
    root = ET.fromstring(to_svg_string(RenderDoc()))
    assert root.tag.endswith("svg")
    assert not [el for el in root.iter() if el.tag.rsplit("}", 1)[-1] in {"path", "line", "circle", "text", "rect"}]


def test_path_uses_absolute_cubics():
    doc = RenderDoc(paths=[PathPrimitive(segments=[[(0, 0), (1, 2), (3, 2), (4, 0)]], closed=False)])
    root = ET.fromstring(to_svg_string(doc))
    (path,) = [el for el in root.iter() if el.tag.rsplit("}", 1)[-1] == "path"]
    assert path.get("d") == "M 0,0 C 1,2 3,2 4,0"


def test_emission_is_deterministic(k76):
    doc = knotplot2(to_controlpoints(k76))
    assert to_svg_string(doc) == to_svg_string(doc.model_copy(deep=True))


def test_written_knot_reads_back(tmp_path, k76):
    out = write_svg(knotplot2(to_controlpoints(k76)), tmp_path / "out" / "k76.svg")
    again = to_minobj(read_svg(out))
    scale = float(np.hypot(*np.ptp(k76.nodes, axis=0)))
    assert np.abs(again.nodes - k76.nodes).max() <= 1e-5 * scale
    assert np.abs(again.handles - k76.handles).max() <= 1e-5 * scale


def test_write_failure(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(IoFailure):
        write_svg(RenderDoc(), blocker / "sub" / "out.svg")


def test_horizontal_and_vertical_lines():
    p = path_points("M 0,0 H 5 V 5 Z")
    assert p.node_count == 3
    assert tuple(p.points[6]) == pytest.approx((5.0, 5.0))
