"""Planar statistics of vertex subsets.

A class key is the pair ``(P*, Z*)`` of bitmasks: the lexicographic minimum
over the solid's group of ``(g(plane ∩ V), g(plane ∩ X))``.  The planar
statistic of ``X`` is the multiset of class keys over every vertex-plane.
"""

from __future__ import annotations

import hashlib
import itertools
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from .field import dist2
from .geometry import SolidModel, indices_of, popcount
from .planes import VertexPlane, enumerate_planes

ClassKey = tuple[int, int]


class StatisticsMismatch(ValueError):
    pass


def class_key(model: SolidModel, plane: VertexPlane | int, x: int) -> ClassKey:
    """Minimum over all group elements of ``(g(P), g(P & X))``."""
    p = plane.incidence if isinstance(plane, VertexPlane) else plane
    z = p & x
    return min((model.apply(k, p), model.apply(k, z)) for k in range(len(model.group)))


@dataclass(frozen=True)
class PlanarStatistic:
    solid_id: str
    counts: Mapping[ClassKey, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def n_classes(self) -> int:
        return len(self.counts)

    def items(self) -> list[tuple[ClassKey, int]]:
        return sorted(self.counts.items())

    def strata(self) -> dict[tuple[int, int], int]:
        """Counts aggregated by ``(|P|, |Z|)``."""
        out: Counter = Counter()
        for (p, z), c in self.counts.items():
            out[popcount(p), popcount(z)] += c
        return dict(sorted(out.items()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, PlanarStatistic):
            return NotImplemented
        return statistics_equal(self, other)

    def __hash__(self) -> int:
        return hash(fingerprint(self))


def planar_statistic(model: SolidModel, planes: Iterable[VertexPlane], x: int) -> PlanarStatistic:
    counts = Counter(class_key(model, p, x) for p in planes)
    return PlanarStatistic(model.solid_id, dict(counts))


def statistics_equal(ps1: PlanarStatistic, ps2: PlanarStatistic) -> bool:
    if ps1.solid_id != ps2.solid_id:
        raise StatisticsMismatch(f"statistics over {ps1.solid_id} and {ps2.solid_id}")
    return dict(ps1.counts) == dict(ps2.counts)


def fingerprint(ps: PlanarStatistic) -> str:
    """128-bit digest of the sorted ``(P, Z, count)`` encoding."""
    h = hashlib.blake2b(digest_size=16)
    h.update(ps.solid_id.encode())
    for (p, z), c in ps.items():
        h.update(f";{p:x},{z:x},{c}".encode())
    return h.hexdigest()


# --- variant keyed by the inclusion Z ⊆ P alone, ignoring how P sits in V ---

VariantKey = tuple


def _metric_orderings(model: SolidModel, p: int) -> tuple[tuple, list[tuple[int, ...]]]:
    """Minimal distance-matrix encoding of the point set ``p`` over all
    orderings, and the orderings that realise it."""
    pts = indices_of(p)
    V = model.vertices
    d = {(a, b): dist2(V[a], V[b]).lex_key for a in pts for b in pts if a < b}

    def encode(order):
        return tuple(d[min(a, b), max(a, b)] for a, b in itertools.combinations(order, 2))

    best = None
    winners: list[tuple[int, ...]] = []
    for order in itertools.permutations(pts):
        e = encode(order)
        if best is None or e < best:
            best, winners = e, [order]
        elif e == best:
            winners.append(order)
    return best, winners


class VariantKeyer:
    """Maps main class keys to keys of the coarser statistic that records
    only the isometry type of the marked point set ``Z ⊆ P``."""

    def __init__(self, model: SolidModel):
        self.model = model
        self._orderings: dict[int, tuple[tuple, list[tuple[int, ...]]]] = {}

    def key(self, p: int, z: int) -> VariantKey:
        if p not in self._orderings:
            self._orderings[p] = _metric_orderings(self.model, p)
        encoding, orders = self._orderings[p]
        marks = min(tuple(int(z >> v & 1) for v in order) for order in orders)
        return (len(orders[0]), encoding, marks)


def restricted_statistic_variant(
    model: SolidModel, planes: Iterable[VertexPlane], x: int, keyer: VariantKeyer | None = None
) -> PlanarStatistic:
    keyer = keyer or VariantKeyer(model)
    main = planar_statistic(model, planes, x)
    return merge_to_variant(main, keyer)


def merge_to_variant(main: PlanarStatistic, keyer: VariantKeyer) -> PlanarStatistic:
    out: Counter = Counter()
    for (p, z), c in main.counts.items():
        out[keyer.key(p, z)] += c
    return PlanarStatistic(main.solid_id, dict(out))


# --- table-driven evaluation for bulk work ---


@dataclass
class StatEngine:
    """Precomputed lookup tables turning a subset mask into class ids.

    For each plane, the group elements carrying its incidence set to the
    orbit minimum form a coset; ``Z*`` is the minimum image of ``Z`` over
    that coset.  All ``2^|P|`` local subsets are tabulated once.
    """

    model: SolidModel
    planes: list[VertexPlane]
    class_keys: list[ClassKey] = field(init=False)
    _local_bits: list[np.ndarray] = field(init=False, repr=False)
    _tables: list[np.ndarray] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        model = self.model
        G = range(len(model.group))
        per_plane: list[tuple[list[int], list[ClassKey]]] = []
        keys: set[ClassKey] = set()
        for plane in self.planes:
            p = plane.incidence
            imgs = [model.apply(k, p) for k in G]
            pstar = min(imgs)
            coset = [k for k in G if imgs[k] == pstar]
            verts = indices_of(p)
            local = []
            for bits in range(1 << len(verts)):
                z = 0
                for b, v in enumerate(verts):
                    if bits >> b & 1:
                        z |= 1 << v
                local.append((pstar, min(model.apply(k, z) for k in coset)))
            keys.update(local)
            per_plane.append((verts, local))
        self.class_keys = sorted(keys)
        index = {k: i for i, k in enumerate(self.class_keys)}
        self._local_bits = [np.array(v, dtype=np.int64) for v, _ in per_plane]
        self._tables = [np.array([index[k] for k in loc], dtype=np.int64) for _, loc in per_plane]

    @classmethod
    def for_model(cls, model: SolidModel) -> "StatEngine":
        return cls(model, enumerate_planes(model))

    @property
    def n_classes(self) -> int:
        return len(self.class_keys)

    def class_ids(self, masks: np.ndarray) -> np.ndarray:
        """Class id of every (subset, plane) pair, shape ``(len(masks), n_planes)``."""
        masks = np.asarray(masks, dtype=np.int64)
        out = np.empty((masks.size, len(self.planes)), dtype=np.int64)
        for j, (verts, table) in enumerate(zip(self._local_bits, self._tables)):
            local = np.zeros(masks.size, dtype=np.int64)
            for b, v in enumerate(verts):
                local |= ((masks >> v) & 1) << b
            out[:, j] = table[local]
        return out

    def count_matrix(self, masks: np.ndarray) -> np.ndarray:
        """Planar statistics as rows of class counts, shape ``(len(masks), n_classes)``."""
        ids = self.class_ids(masks)
        n = ids.shape[0]
        flat = ids + (np.arange(n, dtype=np.int64) * self.n_classes)[:, None]
        return np.bincount(flat.ravel(), minlength=n * self.n_classes).reshape(n, self.n_classes)

    def statistic(self, mask: int) -> PlanarStatistic:
        row = self.count_matrix(np.array([mask]))[0]
        return self.from_counts(row)

    def from_counts(self, row: np.ndarray) -> PlanarStatistic:
        counts = {self.class_keys[i]: int(c) for i, c in enumerate(row) if c}
        return PlanarStatistic(self.model.solid_id, counts)

    @cached_property
    def variant_keyer(self) -> VariantKeyer:
        return VariantKeyer(self.model)
