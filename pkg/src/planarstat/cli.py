"""Command-line front end.

Exit codes: 0 success or verified, 1 verification failed, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from math import comb
from pathlib import Path

from . import figures
from .field import FieldElement
from .geometry import (
    PAIR_S,
    PAIR_T,
    SOLID_IDS,
    SolidModel,
    are_congruent,
    build_solid,
    indices_of,
    mask_of,
    pair_distance_profile,
    path_certificate,
)
from .planes import classify_plane_types, collinear_triples, enumerate_planes, plane_type_key, triple_count
from .search import burnside_counts, find_homometric_pairs, non_homometric_control
from .sections import (
    DEFAULT_R,
    BinSpec,
    SectionError,
    build_truncated,
    circumradius,
    compare_cap_profiles,
    compare_distributions,
    default_epsilon,
    edge_length,
    simulate,
)
from .stats import StatEngine, planar_statistic, statistics_equal

log = logging.getLogger("planarstat")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
MIN_SAMPLES = 10_000
NAMED_SUBSETS = {"S": PAIR_S, "T": PAIR_T}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    solid_id: str = "dodecahedron"
    out: Path = Path("out")
    seed: int = 42
    fmt: str = "json"
    alpha: float = 0.01
    subsets: dict[str, int] = field(default_factory=dict)
    sizes: list[int] = field(default_factory=list)
    n_samples: int = 1_000_000
    cut_eps: float | None = None
    ball_eps: float | None = None
    radius: float = DEFAULT_R
    area_bin: float = 0.25
    short_edge: float | None = None

    @property
    def model(self) -> SolidModel:
        return build_solid(self.solid_id)


def parse_subset(text: str, n: int) -> int:
    """``"0,1,2"``, ranges ``"0..19"``, ``""`` for empty, or the names S and T."""
    text = text.strip()
    if text in NAMED_SUBSETS:
        idx = list(NAMED_SUBSETS[text])
    else:
        idx = []
        for tok in filter(None, (t.strip() for t in text.split(","))):
            try:
                if ".." in tok:
                    lo, hi = tok.split("..")
                    idx.extend(range(int(lo), int(hi) + 1))
                else:
                    idx.append(int(tok))
            except ValueError:
                raise ConfigError(f"bad subset token {tok!r}") from None
    bad = [i for i in idx if not 0 <= i < n]
    if bad:
        raise ConfigError(f"vertex indices {bad} outside 0..{n - 1}")
    return mask_of(idx)


# --- serialization ---


def _fe(x: FieldElement) -> list[str]:
    return [str(x.a), str(x.b)]


def _write_json(path: Path, payload) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return path


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _write_csv(path: Path, header: list[str], rows: list[list]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(_csv_text(header, rows), encoding="utf-8", newline="")
    return path


def _emit(cfg: RunConfig, summary: dict) -> None:
    if cfg.fmt == "csv":
        sys.stdout.write(_csv_text(list(summary), [list(summary.values())]))
    else:
        print(json.dumps(summary))


# --- subcommands ---


def cmd_planes(cfg: RunConfig) -> int:
    model = cfg.model
    planes = enumerate_planes(model)
    types = classify_plane_types(model, planes)
    rows = []
    for p in planes:
        key = plane_type_key(model, p.incidence)
        rows.append({
            "normal": [_fe(c) for c in p.normal],
            "offset": _fe(p.offset),
            "incidence": p.vertices,
            "type": indices_of(key),
            "type_frequency": types[key].count,
        })
    triples = triple_count(planes)
    expected = comb(model.n, 3) - collinear_triples(model)
    _write_json(cfg.out / "planes.json", {
        "solid": model.solid_id,
        "n_planes": len(planes),
        "n_types": len(types),
        "triple_count": triples,
        "expected_triple_count": expected,
        "types": [
            {"exemplar": indices_of(t.key), "size": t.size, "frequency": t.count,
             "stabilizer_order": t.stabilizer_order}
            for t in types.values()
        ],
        "planes": rows,
    })
    _write_csv(cfg.out / "plane_types.csv", ["exemplar", "size", "frequency", "stabilizer_order"],
               [[" ".join(map(str, indices_of(t.key))), t.size, t.count, t.stabilizer_order]
                for t in types.values()])
    print(f"{len(planes)} planes, {len(types)} types")
    ok = triples == expected
    print(f"triple identity: sum C(|P|,3) = {triples}, C({model.n},3) - collinear = {expected}: "
          f"{'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_stats(cfg: RunConfig) -> int:
    model = cfg.model
    x = cfg.subsets.get("subset", 0)
    ps = planar_statistic(model, enumerate_planes(model), x)
    strata = ps.strata()
    _write_json(cfg.out / "stats.json", {
        "solid": model.solid_id,
        "subset": indices_of(x),
        "n_classes": ps.n_classes,
        "total": ps.total,
        "classes": [{"class": {"P": indices_of(p), "Z": indices_of(z)}, "count": c} for (p, z), c in ps.items()],
        "strata": [{"plane_size": a, "subset_size": b, "count": c} for (a, b), c in strata.items()],
    })
    _write_csv(cfg.out / "stats_strata.csv", ["plane_size", "subset_size", "count"],
               [[a, b, c] for (a, b), c in strata.items()])
    _write_csv(cfg.out / "stats_classes.csv", ["P", "Z", "count"],
               [[" ".join(map(str, indices_of(p))), " ".join(map(str, indices_of(z))), c]
                for (p, z), c in ps.items()])
    print(f"{ps.n_classes} classes, total {ps.total}")
    _emit(cfg, {"solid": model.solid_id, "n_classes": ps.n_classes, "total": ps.total})
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    model = cfg.model
    s = cfg.subsets.get("s", mask_of(PAIR_S))
    t = cfg.subsets.get("t", mask_of(PAIR_T))
    planes = enumerate_planes(model)
    equal = statistics_equal(planar_statistic(model, planes, s), planar_statistic(model, planes, t))
    congruent = are_congruent(model, s, t)
    cs, ct = path_certificate(model, s), path_certificate(model, t)
    checks = {
        "statistics_equal": equal,
        "not_congruent": not congruent,
        "path_certificate_separates": cs.invariant != ct.invariant,
    }
    for name, ok in checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    _write_json(cfg.out / "verify.json", {
        "solid": model.solid_id,
        "s": indices_of(s),
        "t": indices_of(t),
        "checks": checks,
        "certificates": {
            name: {"paths": [list(p) for p in c.paths],
                   "isolated_endpoints": [list(e) for e in c.isolated_endpoints],
                   "distance": c.distance}
            for name, c in (("s", cs), ("t", ct))
        },
    })
    return EXIT_OK if all(checks.values()) else EXIT_FAIL


def cmd_search(cfg: RunConfig) -> int:
    model = cfg.model
    engine = StatEngine.for_model(model)
    sizes = cfg.sizes or list(range(model.n + 1))
    burnside = burnside_counts(model)
    out, rows, total = [], [], 0
    for r in sizes:
        t0 = time.perf_counter()
        rep = find_homometric_pairs(model, r, engine)
        log.info("size %d: %d orbits, %d pairs in %.2fs", r, rep.n_orbits, rep.n_pairs, time.perf_counter() - t0)
        total += rep.n_pairs
        out.append({
            "size": r,
            "n_orbits": rep.n_orbits,
            "burnside_orbits": burnside[r],
            "n_pairs": rep.n_pairs,
            "pairs": [[indices_of(x), indices_of(y)] for x, y in rep.pairs],
        })
        rows.append([r, rep.n_orbits, burnside[r], rep.n_pairs])
    _write_json(cfg.out / "pairs.json", {"solid": model.solid_id, "total_pairs": total, "sizes": out})
    _write_csv(cfg.out / "pairs_summary.csv", ["size", "n_orbits", "burnside_orbits", "n_pairs"], rows)
    print(f"{total} pairs")
    _emit(cfg, {"solid": model.solid_id, "total_pairs": total})
    return EXIT_OK


def _dist_payload(d) -> dict:
    return {
        "n_samples": d.n_samples,
        "misses": d.misses,
        "strata": {str(m): c for m, c in d.strata.items()},
        "ambiguous_high_strata": d.ambiguous_high_strata,
        "histogram": [{"m": k[0], "vertex_count": k[1], "short_edges": k[2], "area_bin": k[3], "count": c}
                      for k, c in d.hist.items()],
    }


def _chi(c) -> dict:
    return {"statistic": c.statistic, "dof": c.dof, "p_value": c.p_value, "bins": c.n_bins}


def cmd_sections(cfg: RunConfig) -> int:
    model = cfg.model
    x = cfg.subsets.get("x", mask_of(PAIR_S))
    y = cfg.subsets.get("y", mask_of(PAIR_T))
    cut = cfg.cut_eps if cfg.cut_eps is not None else default_epsilon(model)
    ball = cfg.ball_eps if cfg.ball_eps is not None else cut
    spec = BinSpec(area_width=cfg.area_bin, short_len=cfg.short_edge if cfg.short_edge else 2 * cut)
    incidences = [p.incidence for p in enumerate_planes(model)]
    kx, ky = build_truncated(model, x, cut), build_truncated(model, y, cut)
    dx = simulate(model, kx, cfg.n_samples, cfg.seed, 0, cfg.radius, ball, cut, spec, incidences)
    dy = simulate(model, ky, cfg.n_samples, cfg.seed, 1, cfg.radius, ball, cut, spec, incidences)
    report = compare_distributions(dx, dy, cfg.alpha)
    caps2 = compare_cap_profiles(dx, dy, 2)
    payload = {
        "solid": model.solid_id,
        "x": indices_of(x),
        "y": indices_of(y),
        "seed": cfg.seed,
        "n_samples": cfg.n_samples,
        "radius": cfg.radius,
        "cut_epsilon": cut,
        "ball_epsilon": ball,
        "area_bin": spec.area_width,
        "short_edge": spec.short_len,
        "alpha": cfg.alpha,
        "same_pair_distances": _same_profile(model, x, y),
        "overall": _chi(report.overall),
        "per_stratum": {str(m): _chi(c) for m, c in report.per_stratum.items()},
        "cap_profile_m2": _chi(caps2),
        "total_variation": report.total_variation,
        "rejected": report.rejected,
        "distributions": {"x": _dist_payload(dx), "y": _dist_payload(dy)},
    }
    _write_json(cfg.out / "sections_report.json", payload)
    keys = sorted(set(dx.hist) | set(dy.hist))
    _write_csv(cfg.out / "sections_hist.csv", ["m", "vertex_count", "short_edges", "area_bin", "count_x", "count_y"],
               [[*k, dx.hist.get(k, 0), dy.hist.get(k, 0)] for k in keys])
    figures.sections_figure([("X", dx), ("Y", dy)], cfg.out / "sections.svg")
    verdict = "reject" if report.rejected else "no rejection"
    print(f"chi2={report.overall.statistic:.2f} dof={report.overall.dof} p={report.overall.p_value:.4g} "
          f"at alpha={cfg.alpha}: {verdict}")
    return EXIT_FAIL if report.rejected else EXIT_OK


def _same_profile(model, x, y) -> bool:
    return pair_distance_profile(model, x) == pair_distance_profile(model, y)


def cmd_figures(cfg: RunConfig) -> int:
    model = cfg.model
    a = cfg.subsets.get("a", mask_of(PAIR_S) if model.solid_id == "dodecahedron" else 0)
    b = cfg.subsets.get("b", mask_of(PAIR_T) if model.solid_id == "dodecahedron" else 0)
    figures.schlegel_figure(model, cfg.out / "schlegel.svg")
    figures.subsets_figure(model, cfg.out / "subsets.svg", [("S", a), ("T", b)])
    ps = planar_statistic(model, enumerate_planes(model), a)
    cells = figures.class_thumbnails(model, ps, cfg.out / "classes")
    figures.class_table(model, ps, cfg.out / "classes.svg")
    print(f"schlegel.svg, subsets.svg, {len(cells)} class thumbnails")
    return EXIT_OK


# --- argument parsing ---


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--solid", choices=SOLID_IDS, default="dodecahedron")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--seed", type=_u64, default=42)
    common.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json",
                        help="format of the summary echoed to stdout")
    common.add_argument("--alpha", type=float, default=0.01)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="planarstat", description="Planar statistics of Platonic solid vertex subsets.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("planes", parents=[common], help="enumerate vertex-planes and their types")

    p = sub.add_parser("stats", parents=[common], help="planar statistic of a subset")
    p.add_argument("--subset", default="", help="e.g. 0,1,2,3,4,11,17 or 0..19 or S")

    p = sub.add_parser("verify", parents=[common], help="check a homometric non-congruent pair")
    p.add_argument("--s-subset", default="S")
    p.add_argument("--t-subset", default="T")

    p = sub.add_parser("search", parents=[common], help="exhaustive homometric pair search")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--size", type=int)
    g.add_argument("--all-sizes", action="store_true")

    p = sub.add_parser("sections", parents=[common], help="Monte Carlo section distributions")
    p.add_argument("--x-subset", default="S")
    p.add_argument("--y-subset", default="T", help="subset, S, T, or 'control'")
    p.add_argument("--n", type=int, default=1_000_000, help=f"samples per polytope (>= {MIN_SAMPLES})")
    p.add_argument("--epsilon", type=float, help="cap cut distance (default 0.05 * edge)")
    p.add_argument("--ball-epsilon", type=float, help="stratum ball radius (default: cut distance)")
    p.add_argument("--radius", type=float, default=DEFAULT_R)
    p.add_argument("--area-bin", type=float, default=0.25)
    p.add_argument("--short-edge", type=float, help="short-edge threshold (default 2 * epsilon)")

    p = sub.add_parser("figures", parents=[common], help="SVG diagrams")
    p.add_argument("--subset-a", default=None)
    p.add_argument("--subset-b", default=None)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(solid_id=args.solid, out=args.out, seed=args.seed, fmt=args.fmt, alpha=args.alpha)
    if not 0 < cfg.alpha < 1:
        raise ConfigError("alpha must lie in (0, 1)")
    n = cfg.model.n
    needs_dodeca = {"S", "T"}
    raw = {}
    if args.command == "stats":
        raw["subset"] = args.subset
    elif args.command == "verify":
        raw["s"], raw["t"] = args.s_subset, args.t_subset
    elif args.command == "sections":
        raw["x"], raw["y"] = args.x_subset, args.y_subset
    elif args.command == "figures":
        raw = {k: v for k, v in (("a", args.subset_a), ("b", args.subset_b)) if v is not None}
    for key, text in raw.items():
        if text.strip() in needs_dodeca and cfg.solid_id != "dodecahedron":
            raise ConfigError(f"named subset {text} is defined on the dodecahedron only")
        if key == "y" and text.strip() == "control":
            continue
        cfg.subsets[key] = parse_subset(text, n)

    if args.command == "search":
        if args.size is not None:
            if not 0 <= args.size <= n:
                raise ConfigError(f"--size must lie in 0..{n}")
            cfg.sizes = [args.size]
    if args.command == "sections":
        if args.n < MIN_SAMPLES:
            raise ConfigError(f"--n must be at least {MIN_SAMPLES}")
        cfg.n_samples = args.n
        model = cfg.model
        cfg.cut_eps = args.epsilon
        cfg.ball_eps = args.ball_epsilon
        half = edge_length(model) / 2
        if args.epsilon is not None and not 0 < args.epsilon < half:
            raise ConfigError(f"--epsilon must lie in (0, {half:.6f})")
        if args.ball_epsilon is not None and not 0 < args.ball_epsilon < half:
            raise ConfigError(f"--ball-epsilon must lie in (0, {half:.6f})")
        if args.radius < circumradius(model):
            raise ConfigError(f"--radius must be at least the circumradius {circumradius(model):.6f}")
        if args.area_bin <= 0 or (args.short_edge is not None and args.short_edge <= 0):
            raise ConfigError("--area-bin and --short-edge must be positive")
        cfg.radius, cfg.area_bin, cfg.short_edge = args.radius, args.area_bin, args.short_edge
        if args.y_subset.strip() == "control":
            cfg.subsets["y"] = non_homometric_control(model, cfg.subsets["x"])
    return cfg


COMMANDS = {
    "planes": cmd_planes,
    "stats": cmd_stats,
    "verify": cmd_verify,
    "search": cmd_search,
    "sections": cmd_sections,
    "figures": cmd_figures,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
    except (ConfigError, SectionError) as exc:
        print(f"planarstat {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return COMMANDS[args.command](cfg)


if __name__ == "__main__":
    sys.exit(main())
