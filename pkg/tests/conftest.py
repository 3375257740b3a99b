import math
import os

import numpy as np
import pytest

from knotfair.fixtures import fixture_path
from knotfair.knot import MinObj, to_controlpoints, to_minobj
from knotfair.models import OverUnderSpec, SymmetrySpec
from knotfair.svg_io import read_svg

slow = pytest.mark.skipif(os.environ.get("KNOTFAIR_SLOW") != "1", reason="set KNOTFAIR_SLOW=1")

# radial-error optimum for four arcs; 4/3 tan(pi/8) is a touch larger
QUARTER_CIRCLE_HANDLE = 0.5519150244935106

SVG_TEMPLATE = '<svg xmlns="http://www.w3.org/2000/svg" width="100" height="100">{body}</svg>'


def circle_minobj(n: int = 4, radius: float = 1.0, center=(0.0, 0.0)) -> MinObj:
    """n-node Bezier approximation of a circle, counterclockwise."""
    k = (QUARTER_CIRCLE_HANDLE if n == 4 else 4.0 / 3.0 * math.tan(math.pi / (2 * n))) * radius
    angles = 2.0 * math.pi * np.arange(n) / n
    nodes = np.column_stack([np.cos(angles), np.sin(angles)]) * radius + np.asarray(center)
    tangents = np.column_stack([-np.sin(angles), np.cos(angles)])
    return MinObj(nodes, nodes + k * tangents)


def svg_text(body: str) -> str:
    return SVG_TEMPLATE.format(body=body)


def write_svg_file(tmp_path, body: str, name: str = "knot.svg"):
    path = tmp_path / name
    path.write_text(svg_text(body))
    return path


@pytest.fixture(scope="session")
def k76():
    return to_minobj(read_svg(fixture_path("7_6_first_draft.svg")))


@pytest.fixture(scope="session")
def k41():
    return to_minobj(read_svg(fixture_path("4_1_first_draft.svg")))


@pytest.fixture(scope="session")
def k51():
    return to_minobj(read_svg(fixture_path("5_1_first_draft.svg")))


@pytest.fixture(scope="session")
def unknot():
    return to_minobj(read_svg(fixture_path("unknot.svg")))


@pytest.fixture(scope="session")
def c76(k76):
    return to_controlpoints(k76)


@pytest.fixture(scope="session")
def ou76():
    return OverUnderSpec.from_file(fixture_path("7_6.overunder.json"))


@pytest.fixture(scope="session")
def spec41():
    return SymmetrySpec.from_file(fixture_path("4_1.symmetry.json"))


@pytest.fixture(scope="session")
def spec51():
    return SymmetrySpec.from_file(fixture_path("5_1.symmetry.json"))


CROSSINGS_76 = {(1, 12), (2, 11), (3, 7), (4, 15), (6, 16), (8, 14), (10, 13)}
CROSSINGS_41 = {(4, 7), (5, 10), (6, 9), (8, 11)}
