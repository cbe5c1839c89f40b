"""Monte Carlo planar sections of vertex-truncated polytopes.

Planes are drawn from the rotation- and translation-invariant measure,
restricted to planes at distance at most ``R`` from the origin: a uniform
unit normal and an independent uniform offset in ``[-R, R]``.  Each section
polygon is reduced to isometry-invariant features and binned; distributions
of two polytopes are compared with a two-sample chi-square test.
"""

from __future__ import annotations

import math
import os
from collections import Counter
from dataclasses import dataclass

import numba
import numpy as np
from scipy import stats as sps

from .geometry import SolidModel, indices_of
from .planes import enumerate_planes, supporting_planes

# the bundled TBB is too old for numba; skip it instead of warning
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

CLIP_TOL = 1e-9
AREA_TOL = 1e-12
QUANTUM = 1e-4
DEFAULT_R = 2.0
CHUNK = 1 << 16


class SectionError(ValueError):
    pass


def edge_length(model: SolidModel) -> float:
    return math.sqrt(float(model.edge_length2))


def default_epsilon(model: SolidModel) -> float:
    return 0.05 * edge_length(model)


def circumradius(model: SolidModel) -> float:
    return float(np.linalg.norm(model.float_vertices, axis=1).max())


@dataclass(frozen=True)
class Polytope:
    """Intersection of half-spaces ``normal . x <= offset``."""

    normals: np.ndarray
    offsets: np.ndarray
    tags: tuple[str, ...]

    @property
    def n_halfspaces(self) -> int:
        return len(self.tags)

    @property
    def is_cap(self) -> np.ndarray:
        return np.array([t.startswith("cap") for t in self.tags])

    def contains(self, pts: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return np.all(pts @ self.normals.T <= self.offsets + tol, axis=1)


def _facets(model: SolidModel) -> tuple[np.ndarray, np.ndarray]:
    normals, offsets = [], []
    for p in supporting_planes(model, enumerate_planes(model)):
        n = np.array(p.normal.to_floats())
        d = float(p.offset)
        if d < 0:
            n, d = -n, -d
        scale = np.linalg.norm(n)
        normals.append(n / scale)
        offsets.append(d / scale)
    return np.array(normals), np.array(offsets)


def cap_points(model: SolidModel, v: int, eps: float) -> np.ndarray:
    """Points at distance ``eps`` from vertex ``v`` along its edges."""
    P = model.float_vertices
    out = []
    for u in sorted(model.adjacency[v]):
        d = P[u] - P[v]
        out.append(P[v] + eps * d / np.linalg.norm(d))
    return np.array(out)


def build_truncated(model: SolidModel, x: int, eps: float | None = None) -> Polytope:
    """The solid with a congruent cap cut off at every vertex of ``x``."""
    eps = default_epsilon(model) if eps is None else eps
    half_edge = edge_length(model) / 2
    if not 0 < eps < half_edge:
        raise SectionError(f"cut epsilon {eps} outside (0, {half_edge:.6f})")
    normals, offsets = _facets(model)
    tags = ["face"] * len(offsets)
    P = model.float_vertices
    caps_n, caps_d = [], []
    for v in indices_of(x):
        pts = cap_points(model, v, eps)
        n = P[v] / np.linalg.norm(P[v])
        d = float(pts[0] @ n)
        if not np.allclose(pts @ n, d, atol=1e-12):
            raise SectionError(f"cut points at vertex {v} are not coplanar with the radial normal")
        caps_n.append(n)
        caps_d.append(d)
        tags.append(f"cap:{v}")
    if caps_n:
        normals = np.vstack([normals, caps_n])
        offsets = np.concatenate([offsets, caps_d])
    return Polytope(normals, offsets, tuple(tags))


# --- plane sampling ---


def sample_planes(rng: np.random.Generator, R: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    g = rng.standard_normal((n, 3))
    dirs = g / np.linalg.norm(g, axis=1)[:, None]
    offsets = rng.uniform(-R, R, n)
    return dirs, offsets


@dataclass(frozen=True)
class PlaneSample:
    direction: np.ndarray
    offset: float


def sample_plane(rng: np.random.Generator, R: float) -> PlaneSample:
    d, o = sample_planes(rng, R, 1)
    return PlaneSample(d[0], float(o[0]))


def chunk_rng(seed: int, stream: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, chunk)))


# --- clipping kernel ---


@numba.njit(cache=True)
def _frame(n):
    """Orthonormal in-plane basis, chosen deterministically from the normal."""
    ax = 0
    if abs(n[1]) < abs(n[ax]):
        ax = 1
    if abs(n[2]) < abs(n[ax]):
        ax = 2
    e = np.zeros(3)
    e[ax] = 1.0
    u = np.cross(n, e)
    u = u / np.sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2])
    w = np.cross(n, u)
    return u, w


@numba.njit(cache=True)
def _clip(normals, offsets, u, w, c, tol, px, py, qx, qy, cnt):
    """Sutherland-Hodgman clip of ``(px, py)[:cnt]`` against half-spaces.

    Returns the new vertex count and how many half-spaces removed area.
    A half-space containing the whole polygon leaves the buffers untouched.
    """
    cuts = 0
    for k in range(normals.shape[0]):
        a0 = normals[k, 0] * u[0] + normals[k, 1] * u[1] + normals[k, 2] * u[2]
        a1 = normals[k, 0] * w[0] + normals[k, 1] * w[1] + normals[k, 2] * w[2]
        b = offsets[k] - (normals[k, 0] * c[0] + normals[k, 1] * c[1] + normals[k, 2] * c[2])
        m = 0
        changed = False
        for i in range(cnt):
            j = i + 1 if i + 1 < cnt else 0
            si = a0 * px[i] + a1 * py[i] - b
            sj = a0 * px[j] + a1 * py[j] - b
            in_i = si <= tol
            if in_i:
                qx[m] = px[i]
                qy[m] = py[i]
                m += 1
            else:
                changed = True
            if in_i != (sj <= tol):
                t = si / (si - sj)
                qx[m] = px[i] + t * (px[j] - px[i])
                qy[m] = py[i] + t * (py[j] - py[i])
                m += 1
        if changed:
            cuts += 1
            for i in range(m):
                px[i] = qx[i]
                py[i] = qy[i]
            cnt = m
        if cnt == 0:
            break
    return cnt, cuts


@numba.njit(cache=True)
def _dedup(px, py, qx, qy, cnt, tol):
    m = 0
    for i in range(cnt):
        if m > 0 and abs(px[i] - qx[m - 1]) <= tol and abs(py[i] - qy[m - 1]) <= tol:
            continue
        qx[m] = px[i]
        qy[m] = py[i]
        m += 1
    while m > 1 and abs(qx[0] - qx[m - 1]) <= tol and abs(qy[0] - qy[m - 1]) <= tol:
        m -= 1
    for i in range(m):
        px[i] = qx[i]
        py[i] = qy[i]
    return m


@numba.njit(cache=True)
def _section_polygon(normals, offsets, first_cap, n, off, R, tol, px, py, qx, qy):
    u, w = _frame(n)
    c = n * off
    h = 2.0 * R
    px[0], py[0] = -h, -h
    px[1], py[1] = h, -h
    px[2], py[2] = h, h
    px[3], py[3] = -h, h
    cnt, _ = _clip(normals[:first_cap], offsets[:first_cap], u, w, c, tol, px, py, qx, qy, 4)
    cuts = 0
    if cnt >= 3:
        cnt, cuts = _clip(normals[first_cap:], offsets[first_cap:], u, w, c, tol, px, py, qx, qy, cnt)
    return _dedup(px, py, qx, qy, cnt, tol), cuts


@numba.njit(cache=True)
def _area_perimeter(px, py, cnt):
    a = 0.0
    p = 0.0
    for i in range(cnt):
        j = i + 1 if i + 1 < cnt else 0
        a += px[i] * py[j] - px[j] * py[i]
        p += math.hypot(px[j] - px[i], py[j] - py[i])
    return 0.5 * abs(a), p


@numba.njit(cache=True, parallel=True)
def _features(normals, offsets, first_cap, dirs, offs, R, tol, area_tol, short_len, out_i, out_f):
    """Per sample: (vertex count, short edges, cap cuts) and (area, perimeter).

    Empty or degenerate sections get vertex count 0.
    """
    size = 8 + 2 * normals.shape[0]
    for s in numba.prange(dirs.shape[0]):
        px = np.empty(size)
        py = np.empty(size)
        qx = np.empty(size)
        qy = np.empty(size)
        cnt, cuts = _section_polygon(normals, offsets, first_cap, dirs[s], offs[s], R, tol, px, py, qx, qy)
        out_i[s, 2] = cuts
        area, perim = 0.0, 0.0
        if cnt >= 3:
            area, perim = _area_perimeter(px, py, cnt)
        if cnt < 3 or area < area_tol:
            out_i[s, 0] = 0
            out_i[s, 1] = 0
            out_f[s, 0] = 0.0
            out_f[s, 1] = 0.0
            continue
        short = 0
        for i in range(cnt):
            j = i + 1 if i + 1 < cnt else 0
            if math.hypot(px[j] - px[i], py[j] - py[i]) < short_len:
                short += 1
        out_i[s, 0] = cnt
        out_i[s, 1] = short
        out_f[s, 0] = area
        out_f[s, 1] = perim


def _buffers(polytope: Polytope) -> tuple[np.ndarray, ...]:
    size = 8 + 2 * polytope.n_halfspaces
    return tuple(np.empty(size) for _ in range(4))


def _first_cap(polytope: Polytope) -> int:
    caps = np.flatnonzero(polytope.is_cap)
    return int(caps[0]) if caps.size else polytope.n_halfspaces


def plane_frame(direction: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return _frame(np.asarray(direction, dtype=float))


def section(polytope: Polytope, direction, offset: float, R: float = DEFAULT_R,
            tol: float = CLIP_TOL) -> np.ndarray:
    """Section polygon in in-plane coordinates, counter-clockwise; shape ``(k, 2)``.

    Returns an empty ``(0, 2)`` array when the plane misses the polytope or
    the section is degenerate.
    """
    n = np.asarray(direction, dtype=float)
    px, py, qx, qy = _buffers(polytope)
    cnt, _ = _section_polygon(polytope.normals, polytope.offsets, _first_cap(polytope),
                              n, float(offset), R, tol, px, py, qx, qy)
    if cnt < 3:
        return np.empty((0, 2))
    poly = np.column_stack([px[:cnt], py[:cnt]])
    if polygon_area(poly) < AREA_TOL:
        return np.empty((0, 2))
    return poly


def to_space(poly: np.ndarray, direction, offset: float) -> np.ndarray:
    n = np.asarray(direction, dtype=float)
    u, w = plane_frame(n)
    return n * offset + poly[:, :1] * u + poly[:, 1:] * w


def polygon_area(poly: np.ndarray) -> float:
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)))


def is_convex(poly: np.ndarray, tol: float = 1e-9) -> bool:
    d1 = np.roll(poly, -1, axis=0) - poly
    d2 = np.roll(d1, -1, axis=0)
    z = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    return bool(np.all(z >= -tol) or np.all(z <= tol))


@dataclass(frozen=True)
class SectionSignature:
    vertex_count: int
    perimeter: float
    area: float
    edge_lengths: tuple[float, ...]
    code: tuple[tuple[int, int], ...]

    def short_edges(self, short_len: float) -> int:
        return sum(1 for e in self.edge_lengths if e < short_len)


def _cyclic_code(lengths: np.ndarray, turns: np.ndarray, q: float) -> tuple[tuple[int, int], ...]:
    seq = [(int(round(a / q)), int(round(b / q))) for a, b in zip(lengths, turns)]
    k = len(seq)
    return min(tuple(seq[i:] + seq[:i]) for i in range(k))


def signature(poly: np.ndarray, q: float = QUANTUM) -> SectionSignature | None:
    """Isometry-invariant summary of a convex polygon; None if degenerate."""
    poly = np.asarray(poly, dtype=float)
    if len(poly) < 3 or polygon_area(poly) < AREA_TOL:
        return None
    edges = np.roll(poly, -1, axis=0) - poly
    lengths = np.hypot(edges[:, 0], edges[:, 1])
    heading = np.arctan2(edges[:, 1], edges[:, 0])
    # exterior angle at the vertex between edge i and edge i+1
    turns = np.abs((np.roll(heading, -1) - heading + np.pi) % (2 * np.pi) - np.pi)
    forward = _cyclic_code(lengths, turns, q)
    # reversed traversal: edge order reversed, turn i sits between edges i+1 and i
    backward = _cyclic_code(lengths[::-1], np.roll(turns[::-1], -1), q)
    return SectionSignature(
        vertex_count=len(poly),
        perimeter=float(lengths.sum()),
        area=polygon_area(poly),
        edge_lengths=tuple(sorted(float(x) for x in lengths)),
        code=min(forward, backward),
    )


# --- strata ---


def hit_masks(model: SolidModel, dirs: np.ndarray, offsets: np.ndarray, ball_eps: float) -> np.ndarray:
    """Bitmask of vertices whose ``ball_eps``-ball meets each plane."""
    dist = np.abs(np.atleast_2d(dirs) @ model.float_vertices.T - np.atleast_1d(offsets)[:, None])
    bits = (dist < ball_eps).astype(np.int64)
    return bits @ (np.int64(1) << np.arange(model.n, dtype=np.int64))


def stratum_of(direction, offset: float, model: SolidModel, ball_eps: float) -> int:
    """Number of vertex balls ``B(v, ball_eps)`` met by the plane."""
    m = int(hit_masks(model, np.asarray(direction, float)[None, :], np.array([offset]), ball_eps)[0])
    return bin(m).count("1")


# --- distributions ---


@dataclass(frozen=True)
class BinSpec:
    """Histogram binning of section features.

    A bin is ``(stratum, vertex count, short edges, area bin)``; edges
    shorter than ``short_len`` count as short.  Vertex count 0 is the
    empty section.
    """

    area_width: float = 0.25
    short_len: float = 0.1


_M_BITS, _V_BITS, _S_BITS = 6, 6, 6


def _encode(m, vc, short, abin):
    return (((m << _V_BITS | vc) << _S_BITS | short) << 12) | abin


def decode_bin(code: int) -> tuple[int, int, int, int]:
    abin = code & 0xFFF
    code >>= 12
    short = code & ((1 << _S_BITS) - 1)
    code >>= _S_BITS
    vc = code & ((1 << _V_BITS) - 1)
    return (code >> _V_BITS, vc, short, abin)


def bin_of(sig: SectionSignature | None, m: int, spec: BinSpec) -> tuple[int, int, int, int]:
    if sig is None:
        return (m, 0, 0, 0)
    return (m, sig.vertex_count, sig.short_edges(spec.short_len), int(sig.area // spec.area_width))


@dataclass
class SectionDistribution:
    n_samples: int
    misses: int
    hist: dict[tuple[int, int, int, int], int]
    strata: dict[int, int]
    cap_profile: dict[tuple[int, int], int]
    spec: BinSpec
    R: float
    cut_eps: float
    ball_eps: float
    ambiguous_high_strata: int = 0

    def stratum_hist(self, m: int) -> dict[tuple[int, int, int, int], int]:
        return {k: c for k, c in self.hist.items() if k[0] == m}

    @property
    def hit_mass(self) -> int:
        return self.n_samples - self.misses


def worker_count() -> int:
    env = os.environ.get("PLANARSTAT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def simulate(
    model: SolidModel,
    polytope: Polytope,
    n: int,
    seed: int,
    stream: int = 0,
    R: float = DEFAULT_R,
    ball_eps: float | None = None,
    cut_eps: float | None = None,
    spec: BinSpec = BinSpec(),
    plane_incidences: list[int] | None = None,
) -> SectionDistribution:
    """Sample ``n`` planes and histogram the sections of ``polytope``.

    Chunk ``i`` draws from ``SeedSequence(seed, spawn_key=(stream, i))``,
    so results do not depend on the thread count.
    """
    cut_eps = default_epsilon(model) if cut_eps is None else cut_eps
    ball_eps = cut_eps if ball_eps is None else ball_eps
    if R < circumradius(model):
        raise SectionError(f"sampling radius {R} below circumradius {circumradius(model):.6f}")
    numba.set_num_threads(min(worker_count(), numba.config.NUMBA_NUM_THREADS))
    first_cap = _first_cap(polytope)
    incidences = np.array(plane_incidences or [], dtype=np.int64)

    hist: Counter = Counter()
    strata: Counter = Counter()
    caps: Counter = Counter()
    misses = 0
    ambiguous = 0
    for chunk, start in enumerate(range(0, n, CHUNK)):
        size = min(CHUNK, n - start)
        dirs, offs = sample_planes(chunk_rng(seed, stream, chunk), R, size)
        out_i = np.zeros((size, 3), dtype=np.int64)
        out_f = np.zeros((size, 2))
        _features(polytope.normals, polytope.offsets, first_cap, dirs, offs, R,
                  CLIP_TOL, AREA_TOL, spec.short_len, out_i, out_f)
        hits = hit_masks(model, dirs, offs, ball_eps)
        m = np.zeros(size, dtype=np.int64)
        for b in range(model.n):
            m += (hits >> b) & 1
        vc = out_i[:, 0]
        misses += int(np.count_nonzero(vc == 0))
        abin = np.where(vc > 0, np.floor(out_f[:, 0] / spec.area_width), 0).astype(np.int64)
        codes = _encode(m, vc, np.minimum(out_i[:, 1], (1 << _S_BITS) - 1), abin)
        for code, c in zip(*np.unique(codes, return_counts=True)):
            hist[decode_bin(int(code))] += int(c)
        for k, c in zip(*np.unique(m, return_counts=True)):
            strata[int(k)] += int(c)
        pair = m * 64 + out_i[:, 2]
        for k, c in zip(*np.unique(pair, return_counts=True)):
            caps[int(k) // 64, int(k) % 64] += int(c)
        if incidences.size:
            high = hits[m >= 3]
            if high.size:
                inside = (high[:, None] & ~incidences[None, :]) == 0
                ambiguous += int(np.count_nonzero(~inside.any(axis=1)))
    return SectionDistribution(
        n_samples=n,
        misses=misses,
        hist=dict(sorted(hist.items())),
        strata=dict(sorted(strata.items())),
        cap_profile=dict(sorted(caps.items())),
        spec=spec,
        R=R,
        cut_eps=cut_eps,
        ball_eps=ball_eps,
        ambiguous_high_strata=ambiguous,
    )


@dataclass(frozen=True)
class ChiSquare:
    statistic: float
    dof: int
    p_value: float
    n_bins: int


@dataclass(frozen=True)
class ComparisonReport:
    overall: ChiSquare
    per_stratum: dict[int, ChiSquare]
    total_variation: float
    alpha: float

    @property
    def rejected(self) -> bool:
        return self.overall.p_value < self.alpha


class BinningMismatch(ValueError):
    pass


def _merged_counts(a: dict, b: dict, min_expected: float = 5.0) -> tuple[np.ndarray, np.ndarray]:
    keys = sorted(set(a) | set(b))
    ca = np.array([a.get(k, 0) for k in keys], dtype=float)
    cb = np.array([b.get(k, 0) for k in keys], dtype=float)
    na, nb = ca.sum(), cb.sum()
    if na == 0 or nb == 0:
        return ca[:0], cb[:0]
    total = ca + cb
    # expected count per sample under the pooled proportions
    small = (total * min(na, nb) / (na + nb)) < min_expected
    big_a, big_b = ca[~small], cb[~small]
    pool_a, pool_b = ca[small].sum(), cb[small].sum()
    if pool_a + pool_b > 0:
        if (pool_a + pool_b) * min(na, nb) / (na + nb) >= min_expected or big_a.size == 0:
            big_a = np.append(big_a, pool_a)
            big_b = np.append(big_b, pool_b)
        else:
            i = int(np.argmin(big_a + big_b))
            big_a[i] += pool_a
            big_b[i] += pool_b
    return big_a, big_b


def chi_square_two_sample(a: dict, b: dict) -> ChiSquare:
    ca, cb = _merged_counts(a, b)
    if ca.size < 2:
        return ChiSquare(0.0, 0, 1.0, int(ca.size))
    stat, p, dof, _ = sps.chi2_contingency(np.vstack([ca, cb]), correction=False)
    return ChiSquare(float(stat), int(dof), float(p), int(ca.size))


def total_variation(a: dict, b: dict) -> float:
    na, nb = sum(a.values()), sum(b.values())
    keys = set(a) | set(b)
    return 0.5 * sum(abs(a.get(k, 0) / na - b.get(k, 0) / nb) for k in keys)


def compare_distributions(d1: SectionDistribution, d2: SectionDistribution, alpha: float = 0.01) -> ComparisonReport:
    if d1.spec != d2.spec or d1.R != d2.R or d1.ball_eps != d2.ball_eps:
        raise BinningMismatch("distributions use different binning, radius or strata")
    if d1.n_samples != d2.n_samples:
        raise BinningMismatch("distributions have different sample counts")
    overall = chi_square_two_sample(d1.hist, d2.hist)
    per = {m: chi_square_two_sample(d1.stratum_hist(m), d2.stratum_hist(m))
           for m in sorted(set(d1.strata) | set(d2.strata))}
    return ComparisonReport(overall, per, total_variation(d1.hist, d2.hist), alpha)


def compare_cap_profiles(d1: SectionDistribution, d2: SectionDistribution, m: int) -> ChiSquare:
    """Chi-square on the number of caps cutting the section, within stratum ``m``."""
    a = {k: c for k, c in d1.cap_profile.items() if k[0] == m}
    b = {k: c for k, c in d2.cap_profile.items() if k[0] == m}
    return chi_square_two_sample(a, b)
