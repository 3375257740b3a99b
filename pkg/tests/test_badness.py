import math

import numpy as np
import pytest
from pydantic import ValidationError

from knotfair.badness import (
    SENTINEL,
    assess,
    badness,
    component_breakdown,
    crossing_separation_badness,
    curvature_variation_badness,
    hinge,
    normalize,
    pair_hinge_sum,
    repel_badness,
    topology_badness,
    total_bending_energy,
    total_crossing_angles,
)
from knotfair.bezier import CubicSegment, arc_length_array
from knotfair.errors import DegenerateKnot, IoFailure
from knotfair.knot import ControlPoints, KnotVec, MinObj, to_controlpoints, to_knotvec
from knotfair.models import BadnessWeights, TopologyFingerprint
from knotfair.symmetry import symmetrize

from conftest import circle_minobj


def test_normalize_sets_length_and_centroid(c76):
    normal, scale = normalize(c76)
    assert arc_length_array(normal.segments).sum() == pytest.approx(1.0, rel=1e-9)
    assert tuple(normal.centroid()) == pytest.approx((0.0, 0.0), abs=1e-12)
    assert scale == pytest.approx(1.0 / arc_length_array(c76.segments).sum())


def test_normalize_rejects_a_point():
    point = MinObj(np.full((4, 2), 3.0), np.full((4, 2), 3.0))
    with pytest.raises(DegenerateKnot):
        normalize(to_controlpoints(point))
    assert badness(point) == SENTINEL


def test_non_finite_vector_scores_sentinel():
    values = np.ones(16)
    values[5] = np.nan
    assert badness(KnotVec(values, 4)) == SENTINEL


def test_hinge():
    assert hinge(0.0, 0.1) == pytest.approx(1.0)
    assert hinge(0.2, 0.1) == 0.0
    assert np.allclose(hinge([0.05, 0.1], 0.1), [0.25, 0.0])


def test_pair_hinge_sum():
    assert pair_hinge_sum(np.array([(0.0, 0.0), (0.025, 0.0)]), 0.05) == pytest.approx(0.25)
    assert pair_hinge_sum(np.array([(0.0, 0.0)]), 0.05) == 0.0


def test_circle_components():
    c = to_controlpoints(circle_minobj(8, radius=40.0, center=(100.0, -20.0)))
    # unit length circle: radius 1/(2 pi), energy 2 pi / radius
    assert total_bending_energy(c) == pytest.approx(4 * math.pi**2, abs=0.01)
    assert total_crossing_angles(c) == 0.0
    assert crossing_separation_badness(c) == 0.0
    assert repel_badness(c) == 0.0
    assert curvature_variation_badness(c) < 1e-3


def test_invariant_under_similarity(k76):
    angle = 0.7
    matrix = 3.5 * np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    moved = k76.transformed(matrix, offset=(-250.0, 1000.0))
    assert badness(moved) == pytest.approx(badness(k76), rel=1e-6)


def test_topology_penalty(c76):
    assert topology_badness(c76, TopologyFingerprint(crossing_count=0)) == pytest.approx(700.0)
    assert topology_badness(c76, assess(c76).fingerprint) == 0.0


def test_crossing_angles_of_the_draft(c76):
    value = total_crossing_angles(c76)
    # seven crossings, all between 60 and 85 degrees
    assert 7 * math.cos(math.radians(85)) ** 2 < value < 7 * math.cos(math.radians(60)) ** 2


def test_breakdown_adds_up(c76):
    w = BadnessWeights(w_curvature_variation=0.5, w_node_proximity=1.0)
    result = component_breakdown(c76, w)
    raw, weighted = result.raw.model_dump(), result.weighted.model_dump()
    for name, value in raw.items():
        assert weighted[name] == pytest.approx(getattr(w, f"w_{name}") * value)
    assert sum(weighted.values()) == pytest.approx(result.total)
    assert result.total == pytest.approx(badness(c76, w))
    assert raw["topology"] == 0.0


def test_assess_full_carries_breakdown(k76):
    result = assess(to_knotvec(k76), full=True)
    assert result.breakdown is not None
    assert result.fingerprint.crossing_count == 7
    assert result.value == pytest.approx(result.breakdown.total)


def test_disabled_components_are_skipped(c76):
    lean = BadnessWeights(w_repel=0.0)
    assert assess(c76, lean, full=False).value == pytest.approx(component_breakdown(c76, lean).total)


def test_weights_file_and_overrides(tmp_path):
    path = tmp_path / "weights.env"
    path.write_text("w_angle=3\nw_bend=0.5\nrepel_radius=0.02\n")
    w = BadnessWeights.from_file(path, w_bend="2")
    assert w.w_angle == 3.0
    assert w.w_bend == 2.0
    assert w.repel_radius == 0.02
    assert w.w_cross_sep == BadnessWeights().w_cross_sep


def test_weights_file_missing(tmp_path):
    with pytest.raises(IoFailure):
        BadnessWeights.from_file(tmp_path / "nope.env")


def test_weights_need_one_positive():
    zero = {name: 0.0 for name in BadnessWeights.model_fields if name.startswith("w_")}
    with pytest.raises(ValidationError):
        BadnessWeights(**zero)
    with pytest.raises(ValidationError):
        BadnessWeights(w_angle=-1.0)
    with pytest.raises(ValidationError):
        BadnessWeights(unknown=1.0)


def polygon(*corners):
    """Closed knot of straight segments through ``corners``."""
    ends = list(corners[1:]) + [corners[0]]
    return ControlPoints(np.array([CubicSegment.line(p, q).points for p, q in zip(corners, ends)]))


def test_repel_between_parallel_sides():
    # perimeter 1, long sides 0.1 apart: half the radius
    box = polygon((0.0, 0.0), (0.4, 0.0), (0.4, 0.1), (0.0, 0.1))
    assert repel_badness(box, radius=0.2) == pytest.approx(0.25, rel=1e-6)


@pytest.mark.parametrize("height", np.linspace(0.05, 0.25, 17))
def test_repel_follows_the_hinge(height):
    box = polygon((0.0, 0.0), (0.5 - height, 0.0), (0.5 - height, height), (0.0, height))
    assert repel_badness(box, radius=0.2) == pytest.approx(max(0.0, 1.0 - height / 0.2) ** 2, abs=1e-6)


def test_single_crossing_at_45_degrees():
    loop = polygon((0.0, 0.0), (4.0, 0.0), (3.0, 1.0), (1.0, -1.0))
    assert total_crossing_angles(loop) == pytest.approx(0.5, rel=1e-9)


def test_circle_bends_least():
    circle = circle_minobj(8)
    least = total_bending_energy(circle)
    rng = np.random.default_rng(11)
    for _ in range(100):
        bumped = MinObj(
            circle.nodes + rng.normal(0.0, 0.03, circle.nodes.shape),
            circle.handles + rng.normal(0.0, 0.03, circle.handles.shape),
        )
        assert total_bending_energy(bumped) > least


def test_symmetric_knot_scores_the_same_turned(k51, spec51):
    knot = symmetrize(k51.centered(), spec51)
    angle = 2 * math.pi / 5
    turn = [[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]]
    assert badness(knot.transformed(turn)) == pytest.approx(badness(knot), rel=1e-9)
