"""Vertex-planes: affine planes through at least three vertices of a solid."""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from math import comb

from .field import FieldElement, FieldVec3, cross, dist2, dot, sign
from .geometry import SolidModel, indices_of, mask_of, popcount


@dataclass(frozen=True)
class VertexPlane:
    """Plane ``{x : normal . x = offset}`` with its exact vertex incidence."""

    normal: FieldVec3
    offset: FieldElement
    incidence: int

    @property
    def size(self) -> int:
        return popcount(self.incidence)

    @property
    def vertices(self) -> list[int]:
        return indices_of(self.incidence)

    def side(self, p: FieldVec3) -> int:
        return sign(dot(self.normal, p) - self.offset)


@dataclass(frozen=True)
class PlaneType:
    key: int  # orbit minimum of the incidence mask; doubles as exemplar
    size: int
    count: int
    stabilizer_order: int


def canonical_plane(normal: FieldVec3, offset: FieldElement) -> tuple[FieldVec3, FieldElement]:
    """Scale so the first nonzero normal coordinate is 1."""
    lead = next(c for c in normal if c)
    inv = lead.inverse()
    return normal.scale(inv), offset * inv


def plane_through(a: FieldVec3, b: FieldVec3, c: FieldVec3) -> tuple[FieldVec3, FieldElement] | None:
    n = cross(b - a, c - a)
    if n.is_zero():
        return None
    return canonical_plane(n, dot(n, a))


def enumerate_planes(model: SolidModel) -> list[VertexPlane]:
    """All distinct vertex-planes, sorted by incidence index list.

    Triples already covered by a found plane are skipped: three
    non-collinear points determine their plane.
    """
    V = model.vertices
    found: dict[int, VertexPlane] = {}
    for i, j, k in itertools.combinations(range(model.n), 3):
        t = (1 << i) | (1 << j) | (1 << k)
        if any(inc & t == t for inc in found):
            continue
        eq = plane_through(V[i], V[j], V[k])
        if eq is None:
            continue
        normal, offset = eq
        inc = mask_of(a for a, v in enumerate(V) if dot(normal, v) == offset)
        found[inc] = VertexPlane(normal, offset, inc)
    return sorted(found.values(), key=lambda p: p.vertices)


def triple_count(planes: list[VertexPlane]) -> int:
    """Sum of C(|plane ∩ V|, 3); equals C(n, 3) iff no three vertices are collinear."""
    return sum(comb(p.size, 3) for p in planes)


def collinear_triples(model: SolidModel) -> int:
    V = model.vertices
    return sum(
        1
        for i, j, k in itertools.combinations(range(model.n), 3)
        if cross(V[j] - V[i], V[k] - V[i]).is_zero()
    )


def plane_type_key(model: SolidModel, incidence: int) -> int:
    return min(model.images(incidence))


def classify_plane_types(model: SolidModel, planes: list[VertexPlane]) -> dict[int, PlaneType]:
    """Group planes by the orbit of their incidence set under the solid's group."""
    counts = Counter(plane_type_key(model, p.incidence) for p in planes)
    order = len(model.group)
    out = {}
    for key in sorted(counts):
        stab = sum(1 for img in model.images(key) if img == key)
        out[key] = PlaneType(key, popcount(key), counts[key], stab)
        if counts[key] * stab != order:
            raise AssertionError(f"orbit-stabilizer violated for type {indices_of(key)}")
    return out


def size_histogram(planes: list[VertexPlane]) -> dict[int, int]:
    return dict(sorted(Counter(p.size for p in planes).items()))


def plane_metric_signature(model: SolidModel, plane: VertexPlane | int) -> tuple[FieldElement, ...]:
    """Sorted squared distances between incident vertex pairs."""
    inc = plane.incidence if isinstance(plane, VertexPlane) else plane
    V = model.vertices
    pts = indices_of(inc)
    d = [dist2(V[a], V[b]) for a, b in itertools.combinations(pts, 2)]
    return tuple(sorted(d))


def supporting_planes(model: SolidModel, planes: list[VertexPlane]) -> list[VertexPlane]:
    """Vertex-planes with every vertex on one closed side: the facets."""
    out = []
    for p in planes:
        sides = {p.side(v) for v in model.vertices} - {0}
        if len(sides) <= 1:
            out.append(p)
    return out
