import numpy as np
import pytest

from knotfair.errors import InconsistentSpec
from knotfair.knot import fingerprint, to_controlpoints
from knotfair.models import SymmetrySpec
from knotfair.symmetry import (
    ReducedVec,
    expand,
    projection_matrix,
    reduce,
    reduced_dimension,
    symmetrize,
    symmetry_error,
    symmetry_group,
)

from conftest import CROSSINGS_41, circle_minobj


@pytest.fixture(scope="module")
def sym41(k41, spec41):
    return symmetrize(k41.centered(), spec41)


def test_mirror_symmetrize_4_1(k41, spec41, sym41):
    assert symmetry_error(k41.centered(), spec41) > 1.0
    assert symmetry_error(sym41, spec41) < 1e-12


def test_mirror_images(sym41):
    # pair (2,3): node 3 is the reflection of node 2, its backward handle the reflection of 2's forward handle
    assert tuple(sym41.nodes[2]) == pytest.approx((-sym41.nodes[1][0], sym41.nodes[1][1]))
    backward = sym41.backward_handles()[2]
    assert tuple(backward) == pytest.approx((-sym41.handles[1][0], sym41.handles[1][1]))
    # node 8 sits on the axis with a handle perpendicular to it
    assert sym41.nodes[7][0] == 0.0
    assert sym41.handles[7][1] == pytest.approx(sym41.nodes[7][1])


def test_symmetrize_is_idempotent(sym41, spec41):
    again = symmetrize(sym41, spec41)
    assert np.allclose(again.nodes, sym41.nodes, atol=1e-9)
    assert np.allclose(again.handles, sym41.handles, atol=1e-9)


def test_symmetrized_4_1_keeps_its_crossings(sym41):
    assert set(fingerprint(to_controlpoints(sym41)).crossing_pairs) == CROSSINGS_41


def test_reduced_dimensions(spec41, spec51):
    assert reduced_dimension(spec41, 11) == 22
    without_outer_pair = SymmetrySpec(mver=((2, 3), (9, 7), (5, 11), (10, 6)), xver=(8,))
    assert reduced_dimension(without_outer_pair, 11) == 26
    assert reduced_dimension(spec51, 20) == 8
    assert reduced_dimension(SymmetrySpec(mrot=spec51.mrot), 20) == 16
    assert reduced_dimension(SymmetrySpec(), 7) == 28


def test_rotation_spec_fills_order(spec51):
    assert spec51.rotation_order == 5
    assert len(symmetry_group(spec51, 20).perms) == 10


def test_rotational_symmetrize_5_1(k51, spec51):
    m = k51.centered()
    result = symmetrize(m, spec51)
    assert symmetry_error(m, spec51) > 1.0
    assert symmetry_error(result, spec51) < 1e-9
    # node 12 rotates onto node 4
    turn = 2 * np.pi / 5
    rotation = np.array([[np.cos(turn), -np.sin(turn)], [np.sin(turn), np.cos(turn)]])
    assert np.allclose(result.nodes[3], rotation @ result.nodes[11])
    assert fingerprint(to_controlpoints(result)).crossing_pairs == ((1, 10), (2, 13), (5, 14), (6, 17), (9, 18))


def test_projection_matrix(spec51):
    p = projection_matrix(spec51, 20)
    assert p.shape == (80, 80)
    assert np.linalg.matrix_rank(p) == 8
    assert np.allclose(p @ p, p, atol=1e-12)


def test_expand_of_reduce_is_symmetrize(k51, spec51):
    m = k51.centered()
    r = reduce(m, spec51)
    assert len(r) == 8
    result = expand(r)
    assert result == symmetrize(m, spec51)
    assert np.allclose(reduce(result, spec51).values, r.values)


def test_trivial_spec_is_identity():
    m = circle_minobj(5, radius=3.0, center=(1.0, 2.0))
    result = symmetrize(m, SymmetrySpec())
    assert np.allclose(result.nodes, m.nodes)
    assert np.allclose(result.handles, m.handles)
    assert symmetry_error(m, SymmetrySpec()) == 0.0


def test_node_out_of_range(k41):
    with pytest.raises(InconsistentSpec) as info:
        symmetrize(k41, SymmetrySpec(mver=((1, 12),)))
    assert info.value.index == 12
    assert "12" in str(info.value)


@pytest.mark.parametrize(
    "spec, index",
    [
        (SymmetrySpec(mver=((1, 2), (2, 3))), 2),
        (SymmetrySpec(mver=((1, 2),), xver=(1,)), 1),
        (SymmetrySpec(mver=((4, 4),)), 4),
        (SymmetrySpec(mrot=((1, 2, 3), (3, 4, 5))), 3),
    ],
)
def test_conflicting_specs(spec, index):
    with pytest.raises(InconsistentSpec) as info:
        symmetry_group(spec, 11)
    assert info.value.index == index


def test_mirror_contradicting_rotation():
    spec = SymmetrySpec(mrot=((1, 2, 3, 4),), mver=((1, 2),), xver=(3,))
    with pytest.raises(InconsistentSpec):
        symmetry_group(spec, 4)


def test_malformed_rotation_orbits():
    with pytest.raises(InconsistentSpec):
        symmetry_group(SymmetrySpec(mrot=((1, 2, 3), (4, 5))), 6)
    with pytest.raises(InconsistentSpec):
        symmetry_group(SymmetrySpec(mrot=((1, 2, 3),), rotation_order=4), 6)


def test_reduced_vector_length_is_checked(spec41):
    with pytest.raises(InconsistentSpec):
        ReducedVec(np.zeros(5), spec41, 11)
