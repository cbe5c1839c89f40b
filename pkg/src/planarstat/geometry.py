"""Platonic solid vertex models, their isometry groups as vertex permutations,
and congruence of vertex subsets.

Subsets are plain ``int`` bitmasks (bit ``i`` set means vertex ``i`` is in the
subset).  The dodecahedron follows the golden-ratio coordinate table with
vertex indices 0-19 in table order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Literal, Sequence

import numpy as np

from .field import (
    IDENTITY3,
    PHI,
    PHI_INV,
    FieldElement,
    FieldVec3,
    Matrix3,
    columns3,
    det3,
    dist2,
    dot,
    inv3,
    matmul3,
    matvec3,
    transpose3,
)

SOLID_IDS = ("tetrahedron", "cube", "octahedron", "dodecahedron", "icosahedron")

# the homometric non-congruent 7-subsets of the dodecahedron
PAIR_S = (0, 1, 2, 3, 4, 11, 17)
PAIR_T = (0, 1, 3, 4, 5, 11, 17)

Perm = tuple[int, ...]


class GeometryError(ValueError):
    pass


def _signs(n: int) -> Iterable[tuple[int, ...]]:
    return itertools.product((-1, 1), repeat=n)


def solid_vertices(solid_id: str) -> list[FieldVec3]:
    V = FieldVec3.of
    phi, iphi = PHI, PHI_INV
    if solid_id == "tetrahedron":
        return [V(1, 1, 1), V(1, -1, -1), V(-1, 1, -1), V(-1, -1, 1)]
    if solid_id == "cube":
        return [V(x, y, z) for x, y, z in _signs(3)]
    if solid_id == "octahedron":
        out = []
        for axis in range(3):
            for s in (1, -1):
                c = [0, 0, 0]
                c[axis] = s
                out.append(V(*c))
        return out
    if solid_id == "icosahedron":
        out = []
        for s, t in _signs(2):
            out.append(V(0, s, phi * t))
        for s, t in _signs(2):
            out.append(V(s, phi * t, 0))
        for s, t in _signs(2):
            out.append(V(phi * s, 0, t))
        return out
    if solid_id == "dodecahedron":
        out = [V(x, y, z) for x, y, z in _signs(3)]  # indices 0-7
        out += [
            V(0, iphi, phi), V(0, iphi, -phi), V(0, -iphi, phi), V(0, -iphi, -phi),  # 8-11
            V(iphi, phi, 0), V(-iphi, phi, 0), V(iphi, -phi, 0), V(-iphi, -phi, 0),  # 12-15
            V(phi, 0, iphi), V(phi, 0, -iphi), V(-phi, 0, iphi), V(-phi, 0, -iphi),  # 16-19
        ]
        return out
    raise GeometryError(f"unknown solid {solid_id!r}; expected one of {', '.join(SOLID_IDS)}")


def _value_ids(values: Iterable[FieldElement]) -> dict[FieldElement, int]:
    ids: dict[FieldElement, int] = {}
    for v in values:
        ids.setdefault(v, len(ids))
    return ids


def gram_matrix(vertices: Sequence[FieldVec3]) -> list[list[FieldElement]]:
    return [[dot(u, v) for v in vertices] for u in vertices]


def _spanning_triple(vertices: Sequence[FieldVec3]) -> tuple[int, int, int]:
    for i, j, k in itertools.combinations(range(len(vertices)), 3):
        if det3(columns3(vertices[i], vertices[j], vertices[k])):
            return i, j, k
    raise GeometryError("vertices do not span R^3")


def compute_group(vertices: Sequence[FieldVec3]) -> list[Perm]:
    """All vertex permutations preserving the Gram matrix of dot products.

    For a centred configuration spanning R^3 these are exactly the
    permutations induced by orthogonal maps fixing the vertex set.
    Found by backtracking: vertex ``i`` is assigned an image only if all dot
    products with previously assigned vertices match.
    """
    n = len(vertices)
    total = FieldVec3.of(0, 0, 0)
    for v in vertices:
        total = total + v
    if not total.is_zero():
        raise GeometryError("vertex centroid must be the origin")
    _spanning_triple(vertices)

    gram = gram_matrix(vertices)
    ids = _value_ids(x for row in gram for x in row)
    G = [[ids[x] for x in row] for row in gram]

    result: list[Perm] = []
    image = [-1] * n
    used = [False] * n

    def extend(i: int) -> None:
        if i == n:
            result.append(tuple(image))
            return
        row = G[i]
        for cand in range(n):
            if used[cand] or G[cand][cand] != row[i]:
                continue
            crow = G[cand]
            if all(crow[image[k]] == row[k] for k in range(i)):
                image[i] = cand
                used[cand] = True
                extend(i + 1)
                used[cand] = False
        image[i] = -1

    extend(0)
    result.sort()
    return result


def compose(g: Perm, h: Perm) -> Perm:
    """``g o h``: apply ``h`` first."""
    return tuple(g[h[i]] for i in range(len(h)))


def inverse_perm(g: Perm) -> Perm:
    inv = [0] * len(g)
    for i, gi in enumerate(g):
        inv[gi] = i
    return tuple(inv)


def cycle_lengths(g: Perm) -> list[int]:
    seen = [False] * len(g)
    out = []
    for i in range(len(g)):
        if seen[i]:
            continue
        length = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = g[j]
            length += 1
        out.append(length)
    return out


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def indices_of(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def popcount(mask: int) -> int:
    return bin(mask).count("1")


_CHUNK = 8


@dataclass(frozen=True, eq=False)
class SolidModel:
    solid_id: str
    vertices: tuple[FieldVec3, ...]
    group: tuple[Perm, ...]
    edges: tuple[tuple[int, int], ...]
    _tables: tuple[tuple[tuple[int, ...], ...], ...] = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    @cached_property
    def adjacency(self) -> tuple[frozenset[int], ...]:
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return tuple(frozenset(a) for a in adj)

    @cached_property
    def graph_distance(self) -> tuple[tuple[int, ...], ...]:
        """All-pairs shortest path lengths in the edge graph (BFS)."""
        out = []
        for s in range(self.n):
            dist = [-1] * self.n
            dist[s] = 0
            frontier = [s]
            while frontier:
                nxt = []
                for u in frontier:
                    for w in self.adjacency[u]:
                        if dist[w] < 0:
                            dist[w] = dist[u] + 1
                            nxt.append(w)
                frontier = nxt
            out.append(tuple(dist))
        return tuple(out)

    @cached_property
    def float_vertices(self) -> np.ndarray:
        return np.array([v.to_floats() for v in self.vertices])

    @cached_property
    def edge_length2(self) -> FieldElement:
        i, j = self.edges[0]
        return dist2(self.vertices[i], self.vertices[j])

    def apply(self, g_index: int, mask: int) -> int:
        """Image of a subset under the ``g_index``-th group element."""
        tables = self._tables[g_index]
        out = 0
        shift = 0
        for t in tables:
            out |= t[(mask >> shift) & 0xFF]
            shift += _CHUNK
        return out

    def images(self, mask: int) -> list[int]:
        return [self.apply(k, mask) for k in range(len(self.group))]

    def perm_masks(self) -> np.ndarray:
        """Group as an integer array of shape ``(|G|, n)``."""
        return np.array(self.group, dtype=np.int64)

    def bulk_apply(self, g_index: int, masks: np.ndarray) -> np.ndarray:
        tables = self._np_tables[g_index]
        out = np.zeros_like(masks)
        shift = 0
        for t in tables:
            out |= t[(masks >> shift) & 0xFF]
            shift += _CHUNK
        return out

    @cached_property
    def _np_tables(self) -> list[list[np.ndarray]]:
        return [[np.array(t, dtype=np.int64) for t in tables] for tables in self._tables]


def _perm_tables(g: Perm) -> tuple[tuple[int, ...], ...]:
    n = len(g)
    tables = []
    for start in range(0, n, _CHUNK):
        width = min(_CHUNK, n - start)
        table = [0] * 256
        for byte in range(1 << width):
            out = 0
            for b in range(width):
                if byte >> b & 1:
                    out |= 1 << g[start + b]
            table[byte] = out
        tables.append(tuple(table))
    return tuple(tables)


def _edge_graph(vertices: Sequence[FieldVec3]) -> tuple[tuple[int, int], ...]:
    d2 = {
        (i, j): dist2(vertices[i], vertices[j])
        for i, j in itertools.combinations(range(len(vertices)), 2)
    }
    shortest = min(d2.values())
    return tuple(pair for pair, d in d2.items() if d == shortest)


@lru_cache(maxsize=None)
def build_solid(solid_id: str) -> SolidModel:
    vertices = tuple(solid_vertices(solid_id))
    group = tuple(compute_group(vertices))
    return SolidModel(
        solid_id=solid_id,
        vertices=vertices,
        group=group,
        edges=_edge_graph(vertices),
        _tables=tuple(_perm_tables(g) for g in group),
    )


def orthogonal_matrix(model: SolidModel, g: Perm) -> Matrix3:
    """Exact matrix ``M`` with ``M v_i = v_{g(i)}`` for all vertices.

    Raises :class:`GeometryError` if the reconstructed map is not orthogonal
    or does not realise ``g`` on every vertex.
    """
    V = model.vertices
    i, j, k = _spanning_triple(V)
    src = columns3(V[i], V[j], V[k])
    dst = columns3(V[g[i]], V[g[j]], V[g[k]])
    M = matmul3(dst, inv3(src))
    if matmul3(transpose3(M), M) != IDENTITY3:
        raise GeometryError(f"permutation {g} is not induced by an orthogonal map")
    for a, v in enumerate(V):
        if matvec3(M, v) != V[g[a]]:
            raise GeometryError(f"matrix for {g} fails on vertex {a}")
    return M


def canonical_subset(model: SolidModel, mask: int) -> int:
    return min(model.images(mask))


def are_congruent(model: SolidModel, x: int, y: int) -> bool:
    if popcount(x) != popcount(y):
        return False
    return canonical_subset(model, x) == canonical_subset(model, y)


def congruence_witness(model: SolidModel, x: int, y: int) -> int | None:
    """Index of a group element mapping ``x`` onto ``y``, or None."""
    for k in range(len(model.group)):
        if model.apply(k, x) == y:
            return k
    return None


def pair_distance_profile(model: SolidModel, mask: int) -> dict[FieldElement, int]:
    """Multiplicity of each squared distance among pairs in the subset."""
    out: dict[FieldElement, int] = {}
    V = model.vertices
    for a, b in itertools.combinations(indices_of(mask), 2):
        d = dist2(V[a], V[b])
        out[d] = out.get(d, 0) + 1
    return out


@dataclass(frozen=True)
class PathCertificate:
    """Paths with three edges inside a subset and which of their endpoints
    have no other subset members nearby."""

    paths: tuple[tuple[int, int, int, int], ...]
    isolated_endpoints: tuple[tuple[int, ...], ...]
    distance: str

    @property
    def invariant(self) -> tuple[int, tuple[int, ...]]:
        return (len(self.paths), tuple(sorted(len(e) for e in self.isolated_endpoints)))


def _near(model: SolidModel, u: int, w: int, reading: str) -> bool:
    if reading == "graph":
        return model.graph_distance[u][w] <= 2
    return dist2(model.vertices[u], model.vertices[w]) <= 4


def path_certificate(
    model: SolidModel, mask: int, distance: Literal["graph", "euclidean"] = "graph"
) -> PathCertificate:
    members = indices_of(mask)
    inside = set(members)
    adj = {v: sorted(model.adjacency[v] & inside) for v in members}

    found = set()
    for a in members:
        for b in adj[a]:
            for c in adj[b]:
                if c == a:
                    continue
                for d in adj[c]:
                    if d in (a, b):
                        continue
                    p = (a, b, c, d)
                    found.add(min(p, p[::-1]))
    paths = tuple(sorted(found))

    isolated = []
    for p in paths:
        others = inside - set(p)
        lonely = tuple(
            e for e in (p[0], p[-1]) if not any(_near(model, e, w, distance) for w in others)
        )
        isolated.append(lonely)
    return PathCertificate(paths, tuple(isolated), distance)
