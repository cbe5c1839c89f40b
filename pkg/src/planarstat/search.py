"""Exhaustive search for homometric pairs: non-congruent subsets with equal
planar statistics."""

from __future__ import annotations

import hashlib
import logging
import time
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .geometry import SolidModel, are_congruent, build_solid, cycle_lengths, pair_distance_profile
from .stats import StatEngine

log = logging.getLogger(__name__)


@lru_cache(maxsize=None)
def _all_canonical(solid_id: str) -> np.ndarray:
    model = build_solid(solid_id)
    masks = np.arange(1 << model.n, dtype=np.int64)
    best = masks.copy()
    for k in range(len(model.group)):
        np.minimum(best, model.bulk_apply(k, masks), out=best)
    best.setflags(write=False)
    return best


@lru_cache(maxsize=None)
def _popcounts(n: int) -> np.ndarray:
    masks = np.arange(1 << n, dtype=np.int64)
    pc = np.zeros_like(masks)
    for b in range(n):
        pc += (masks >> b) & 1
    pc.setflags(write=False)
    return pc


def all_canonical_forms(model: SolidModel) -> np.ndarray:
    """Canonical form of every subset, indexed by mask."""
    return _all_canonical(model.solid_id)


def orbit_representatives(model: SolidModel, r: int) -> np.ndarray:
    """Canonical forms of the ``r``-subset orbits, ascending."""
    if not 0 <= r <= model.n:
        raise ValueError(f"subset size {r} outside 0..{model.n}")
    canon = all_canonical_forms(model)
    masks = np.arange(canon.size, dtype=np.int64)
    return masks[(canon == masks) & (_popcounts(model.n) == r)]


def burnside_counts(model: SolidModel) -> list[int]:
    """Orbit counts per subset size from the cycle index of the group.

    Each permutation contributes ``prod_c (1 + t^len(c))``; the averaged
    coefficient of ``t^r`` counts orbits of ``r``-subsets.
    """
    total = [0] * (model.n + 1)
    for g in model.group:
        poly = [1]
        for length in cycle_lengths(g):
            nxt = [0] * (len(poly) + length)
            for i, c in enumerate(poly):
                nxt[i] += c
                nxt[i + length] += c
            poly = nxt
        for i, c in enumerate(poly):
            total[i] += c
    order = len(model.group)
    out = []
    for c in total:
        q = Fraction(c, order)
        if q.denominator != 1:
            raise AssertionError("Burnside average is not an integer")
        out.append(int(q))
    return out


def burnside_total(model: SolidModel) -> int:
    s = sum(2 ** len(cycle_lengths(g)) for g in model.group)
    q, rem = divmod(s, len(model.group))
    if rem:
        raise AssertionError("Burnside average is not an integer")
    return q


@dataclass
class PairReport:
    solid_id: str
    size: int
    pairs: list[tuple[int, int]]
    n_orbits: int
    n_buckets: int
    elapsed: float = field(default=0.0, compare=False)

    @property
    def n_pairs(self) -> int:
        return len(self.pairs)


def _row_digest(row: np.ndarray) -> bytes:
    return hashlib.blake2b(np.ascontiguousarray(row, dtype=np.int64).tobytes(), digest_size=16).digest()


def find_homometric_pairs(model: SolidModel, r: int, engine: StatEngine | None = None) -> PairReport:
    t0 = time.perf_counter()
    engine = engine or StatEngine.for_model(model)
    reps = orbit_representatives(model, r)
    counts = engine.count_matrix(reps)

    buckets: dict[bytes, list[int]] = defaultdict(list)
    for i in range(reps.size):
        buckets[_row_digest(counts[i])].append(i)

    pairs = []
    for members in buckets.values():
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                i, j = members[a], members[b]
                if not np.array_equal(counts[i], counts[j]):
                    log.warning("fingerprint collision between %d and %d", reps[i], reps[j])
                    continue
                x, y = sorted((int(reps[i]), int(reps[j])))
                if are_congruent(model, x, y):
                    raise AssertionError(f"distinct orbit representatives {x}, {y} are congruent")
                pairs.append((x, y))
    pairs.sort()
    return PairReport(model.solid_id, r, pairs, int(reps.size), len(buckets), time.perf_counter() - t0)


def full_sweep(model: SolidModel, engine: StatEngine | None = None) -> dict[int, PairReport]:
    engine = engine or StatEngine.for_model(model)
    out = {}
    for r in range(model.n + 1):
        out[r] = find_homometric_pairs(model, r, engine)
        log.info("%s r=%d: %d orbits, %d pairs", model.solid_id, r, out[r].n_orbits, out[r].n_pairs)
    return out


def non_homometric_control(model: SolidModel, x: int, engine: StatEngine | None = None) -> int:
    """A same-size subset whose statistic differs from that of ``x``.

    Picks the orbit representative whose pair-distance profile is farthest
    (L1) from that of ``x``, so its section distribution differs visibly;
    ties go to the smallest mask.
    """
    engine = engine or StatEngine.for_model(model)
    r = bin(x).count("1")
    reps = orbit_representatives(model, r)
    counts = engine.count_matrix(reps)
    target = engine.count_matrix(np.array([x]))[0]
    ref = pair_distance_profile(model, x)
    best, best_score = None, -1
    for i, rep in enumerate(reps):
        if np.array_equal(counts[i], target):
            continue
        prof = pair_distance_profile(model, int(rep))
        score = sum(abs(prof.get(k, 0) - ref.get(k, 0)) for k in set(prof) | set(ref))
        if score > best_score:
            best, best_score = int(rep), score
    if best is None:
        raise ValueError("every subset of this size shares the statistic")
    return best
