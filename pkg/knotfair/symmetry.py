"""Exact mirror and rotational symmetry for knots.

A :class:`~knotfair.models.SymmetrySpec` generates a finite group: the
mirror ``x -> -x`` and the rotation by ``2*pi/k`` about the origin, each
carrying a (partial) permutation of node indices. The group is closed on
those permutations; a node forced onto two different images makes the spec
inconsistent.

Nodes split into orbits. Each orbit keeps one representative; every other
member is the image of the representative under a fixed group element.
Node positions transform by the element's matrix ``L``; handles of
orientation-reversing elements map to the image of the *backward* handle,
because reflection reverses the direction of travel along the path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InconsistentSpec
from .knot import KnotVec, MinObj, from_knotvec, to_knotvec
from .models import SymmetrySpec

Key = tuple[int, bool]  # (rotation steps r, reflect first)
IDENTITY: Key = (0, False)
MIRROR: Key = (0, True)


def _snap(matrix: np.ndarray) -> np.ndarray:
    snapped = np.where(np.abs(matrix) < 1e-14, 0.0, matrix)
    snapped = np.where(np.abs(np.abs(snapped) - 1.0) < 1e-14, np.sign(snapped), snapped)
    return snapped


def element_matrix(key: Key, order: int) -> np.ndarray:
    steps, reflect = key
    angle = 2.0 * math.pi * steps / order
    rotation = _snap(np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]]))
    if reflect:
        return rotation @ np.diag([-1.0, 1.0])
    return rotation


def compose(g: Key, h: Key, order: int) -> Key:
    """Key of ``g`` applied after ``h``."""
    steps = (g[0] + (-h[0] if g[1] else h[0])) % order
    return steps, g[1] != h[1]


def _fixed_basis(matrices: list[np.ndarray]) -> np.ndarray:
    """Orthonormal basis ``(2, r)`` of the vectors fixed by every matrix."""
    average = sum(matrices) / len(matrices)
    symmetric = 0.5 * (average + average.T)
    values, vectors = np.linalg.eigh(symmetric)
    basis = vectors[:, values > 0.5]
    if basis.shape[1] == 2:
        return np.eye(2)
    basis = _snap(basis)
    for column in range(basis.shape[1]):
        nonzero = basis[np.abs(basis[:, column]) > 0, column]
        if nonzero.size and nonzero[0] < 0:
            basis[:, column] = -basis[:, column]
    return basis


@dataclass
class Orbit:
    representative: int
    members: dict[int, Key]
    stabilizer: list[Key]
    position_basis: np.ndarray
    offset_basis: np.ndarray

    @property
    def dimension(self) -> int:
        return self.position_basis.shape[1] + self.offset_basis.shape[1]


@dataclass
class SymmetryGroup:
    """Closed group of a spec on ``n`` nodes (0-based node indices)."""

    n: int
    order: int
    perms: dict[Key, dict[int, int]]
    orbits: list[Orbit] = field(default_factory=list)

    def matrix(self, key: Key) -> np.ndarray:
        return element_matrix(key, self.order)

    @property
    def dimension(self) -> int:
        return sum(orbit.dimension for orbit in self.orbits)

    def image_handle(self, key: Key, node: np.ndarray, handle: np.ndarray) -> np.ndarray:
        """Forward handle of the image node under ``key``."""
        matrix = self.matrix(key)
        if key[1]:
            return matrix @ (2.0 * node - handle)
        return matrix @ handle

    def average(self, orbit: Orbit, nodes: np.ndarray, handles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Group average of the orbit pulled back to its representative: (node, handle offset)."""
        elements = [key for key in self.perms if orbit.representative in self.perms[key]]
        position = np.zeros(2)
        offset = np.zeros(2)
        for key in elements:
            j = self.perms[key][orbit.representative]
            matrix = self.matrix(key)
            sign = -1.0 if key[1] else 1.0
            position += matrix.T @ nodes[j]
            offset += sign * (matrix.T @ (handles[j] - nodes[j]))
        return position / len(elements), offset / len(elements)

    def place(self, orbit: Orbit, position: np.ndarray, offset: np.ndarray, nodes: np.ndarray, handles: np.ndarray) -> None:
        r = orbit.representative
        nodes[r] = position
        handles[r] = position + offset
        for j, key in orbit.members.items():
            if j == r:
                continue
            nodes[j] = self.matrix(key) @ nodes[r]
            handles[j] = self.image_handle(key, nodes[r], handles[r])


def _validate(spec: SymmetrySpec, n: int) -> None:
    def check(index: int) -> None:
        if not 1 <= index <= n:
            raise InconsistentSpec(f"symmetry spec names node {index} but the knot has {n} nodes", index=index)

    seen: set[int] = set()
    for a, b in spec.mver:
        check(a)
        check(b)
        if a == b:
            raise InconsistentSpec(f"mirror pair ({a},{b}) repeats node {a}", index=a)
        for index in (a, b):
            if index in seen:
                raise InconsistentSpec(f"node {index} appears in two mirror pairs", index=index)
            seen.add(index)
    for index in spec.xver:
        check(index)
        if index in seen:
            raise InconsistentSpec(f"node {index} is both on the axis and in a mirror pair", index=index)
        seen.add(index)
    if spec.mrot:
        lengths = {len(orbit) for orbit in spec.mrot}
        if len(lengths) != 1 or min(lengths) < 2:
            raise InconsistentSpec("rotation orbits must all have the same length k >= 2")
        if spec.rotation_order != len(spec.mrot[0]):
            raise InconsistentSpec(
                f"rotation_order {spec.rotation_order} disagrees with orbit length {len(spec.mrot[0])}"
            )
        rotated: set[int] = set()
        for orbit in spec.mrot:
            for index in orbit:
                check(index)
                if index in rotated:
                    raise InconsistentSpec(f"node {index} appears in two rotation orbits", index=index)
                rotated.add(index)
    elif spec.rotation_order:
        raise InconsistentSpec("rotation_order given without rotation orbits")


def _close(perms: dict[Key, dict[int, int]], order: int) -> None:
    changed = True
    while changed:
        changed = False
        for g, g_perm in list(perms.items()):
            for h, h_perm in list(perms.items()):
                key = compose(g, h, order)
                product = {i: g_perm[j] for i, j in h_perm.items() if j in g_perm}
                target = perms.setdefault(key, {})
                for i, image in product.items():
                    known = target.get(i)
                    if known is None:
                        target[i] = image
                        changed = True
                    elif known != image:
                        raise InconsistentSpec(
                            f"node {i + 1} is mapped to both node {known + 1} and node {image + 1}",
                            index=i + 1,
                        )


def _orbit(group: SymmetryGroup, start: int) -> Orbit:
    elements = sorted((key for key, perm in group.perms.items() if start in perm), key=lambda k: (k[1], k[0]))
    members = sorted({group.perms[key][start] for key in elements})
    for j in members:
        if {key for key, perm in group.perms.items() if j in perm} != set(elements):
            raise InconsistentSpec(
                f"nodes {start + 1} and {j + 1} are related by symmetry but constrained differently",
                index=j + 1,
            )

    def mirror_fixed(j: int) -> bool:
        return group.perms.get(MIRROR, {}).get(j) == j

    rep = min(members, key=lambda j: (not mirror_fixed(j), j))
    chosen: dict[int, Key] = {}
    for key in elements:
        chosen.setdefault(group.perms[key][rep], key)
    stabilizer = [key for key in elements if group.perms[key][rep] == rep]
    matrices = [group.matrix(key) for key in stabilizer]
    signed = [(-1.0 if key[1] else 1.0) * group.matrix(key) for key in stabilizer]
    return Orbit(rep, chosen, stabilizer, _fixed_basis(matrices), _fixed_basis(signed))


@lru_cache(maxsize=64)
def symmetry_group(spec: SymmetrySpec, n: int) -> SymmetryGroup:
    _validate(spec, n)
    order = spec.rotation_order or 1
    perms: dict[Key, dict[int, int]] = {IDENTITY: {i: i for i in range(n)}}
    if spec.mver or spec.xver:
        mirror = {x - 1: x - 1 for x in spec.xver}
        for a, b in spec.mver:
            mirror[a - 1] = b - 1
            mirror[b - 1] = a - 1
        perms[MIRROR] = mirror
    if spec.mrot:
        rotation: dict[int, int] = {}
        for cycle in spec.mrot:
            for j, index in enumerate(cycle):
                rotation[index - 1] = cycle[(j + 1) % order] - 1
        perms[(1 % order, False)] = rotation
    _close(perms, order)
    perms = {key: perm for key, perm in perms.items() if perm}

    group = SymmetryGroup(n=n, order=order, perms=perms)
    assigned: set[int] = set()
    for start in range(n):
        if start in assigned:
            continue
        orbit = _orbit(group, start)
        if assigned & orbit.members.keys():
            raise InconsistentSpec(f"node {start + 1} belongs to overlapping orbits", index=start + 1)
        assigned.update(orbit.members)
        group.orbits.append(orbit)
    group.orbits.sort(key=lambda orbit: orbit.representative)
    return group


@dataclass(frozen=True, slots=True, eq=False)
class ReducedVec:
    """Free parameters of a symmetric knot: per orbit representative, node then handle-offset coordinates."""

    values: np.ndarray
    spec: SymmetrySpec
    n: int

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float).ravel()
        expected = symmetry_group(self.spec, self.n).dimension
        if len(values) != expected:
            raise InconsistentSpec(f"reduced vector has {len(values)} values, spec needs {expected}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    def with_values(self, values) -> "ReducedVec":
        return ReducedVec(values, self.spec, self.n)


def _projected(orbit: Orbit, position: np.ndarray, offset: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pb, ob = orbit.position_basis, orbit.offset_basis
    return pb.T @ position, ob.T @ offset


def symmetrize(m: MinObj, s: SymmetrySpec) -> MinObj:
    """Project onto the symmetric knots: group-average every orbit, then rebuild it exactly."""
    return expand(reduce(m, s))


def reduce(m: MinObj, s: SymmetrySpec) -> ReducedVec:
    group = symmetry_group(s, m.n)
    parts = []
    for orbit in group.orbits:
        position, offset = group.average(orbit, m.nodes, m.handles)
        coords, offsets = _projected(orbit, position, offset)
        parts.extend([coords, offsets])
    values = np.concatenate(parts) if parts else np.zeros(0)
    return ReducedVec(values, s, m.n)


def expand(r: ReducedVec) -> MinObj:
    group = symmetry_group(r.spec, r.n)
    nodes = np.zeros((r.n, 2))
    handles = np.zeros((r.n, 2))
    cursor = 0
    for orbit in group.orbits:
        pb, ob = orbit.position_basis, orbit.offset_basis
        coords = r.values[cursor : cursor + pb.shape[1]]
        cursor += pb.shape[1]
        offsets = r.values[cursor : cursor + ob.shape[1]]
        cursor += ob.shape[1]
        group.place(orbit, pb @ coords, ob @ offsets, nodes, handles)
    return MinObj(nodes, handles)


def symmetry_error(m: MinObj, s: SymmetrySpec) -> float:
    """Largest distance between a node (or handle) and the image its symmetry demands."""
    group = symmetry_group(s, m.n)
    worst = 0.0
    for orbit in group.orbits:
        r = orbit.representative
        node, handle = m.nodes[r], m.handles[r]
        for j, key in orbit.members.items():
            if j == r:
                continue
            worst = max(
                worst,
                float(np.hypot(*(m.nodes[j] - group.matrix(key) @ node))),
                float(np.hypot(*(m.handles[j] - group.image_handle(key, node, handle)))),
            )
        for key in orbit.stabilizer:
            if key == IDENTITY:
                continue
            worst = max(
                worst,
                float(np.hypot(*(group.matrix(key) @ node - node))),
                float(np.hypot(*(group.image_handle(key, node, handle) - handle))),
            )
    return worst


def reduced_dimension(s: SymmetrySpec, n: int) -> int:
    return symmetry_group(s, n).dimension


def projection_matrix(s: SymmetrySpec, n: int) -> np.ndarray:
    """Matrix of :func:`symmetrize` acting on knot-vector coordinates, shape ``(4n, 4n)``."""
    columns = []
    for i in range(4 * n):
        unit = np.zeros(4 * n)
        unit[i] = 1.0
        columns.append(to_knotvec(symmetrize(from_knotvec(KnotVec(unit, n)), s)).values)
    return np.stack(columns, axis=1)
