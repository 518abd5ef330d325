"""Command-line driver.

Exit codes: 0 success, 2 input error, 3 solver error, 4 non-convergence.
"""

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import analysis, means
from .core import SparseSpd, log_det, random_pattern, random_sparse_spd, random_spd
from .errors import (
    DimensionMismatch,
    FactorizationFailure,
    NoConvergence,
    NonPositiveResult,
    NotPositiveDefinite,
    NotSymmetric,
    ParseError,
    SolveFailure,
)
from .geometry import GeodesicKind, dist_hilbert, dist_riemannian, dist_thompson, geodesic
from .io import read_matrix, write_matrix

EXIT_INPUT = 2
EXIT_SOLVER = 3
EXIT_NO_CONVERGENCE = 4

DEFAULT_SEED = 0
DEFAULT_T_GRID = tuple(np.round(np.linspace(0.0, 1.0, 21), 12))


def _g(x):
    return f"{x:.12g}"


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    count: int
    seed: int
    t_grid: tuple = DEFAULT_T_GRID
    tol: float = 1e-8
    out: str = "-"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.count < 1:
            raise ValueError("count must be at least 1")
        t = np.asarray(self.t_grid, dtype=float)
        if t.size == 0 or np.any(np.diff(t) < 0) or t[0] < 0 or t[-1] > 1:
            raise ValueError("t grid must be sorted within [0, 1]")


def parse_grid(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid grid: {text!r}") from None


def _open_out(path):
    if path in (None, "-"):
        return _Stdout()
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    return open(path, "w", newline="", encoding="utf-8")


class _Stdout:
    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        sys.stdout.flush()


def _write_csv(path, header, rows):
    with _open_out(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_json(path, obj):
    with _open_out(path) as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_dist(args):
    X, Y = read_matrix(args.file_x), read_matrix(args.file_y)
    if args.metric == "riemannian":
        d = dist_riemannian(X, Y)
    elif args.metric == "hilbert":
        d = dist_hilbert(X, Y, tol=args.tol)
    else:
        d = dist_thompson(X, Y, tol=args.tol)
    print(_g(d))


def cmd_interpolate(args):
    X, Y = read_matrix(args.file_x), read_matrix(args.file_y)
    kind = GeodesicKind(args.kind)
    os.makedirs(args.out, exist_ok=True)
    rows = []
    for idx, t in enumerate(args.t_grid):
        G = geodesic(kind, X, Y, t)
        ext = "mtx" if isinstance(G, SparseSpd) else "json"
        write_matrix(G, os.path.join(args.out, f"point_{idx:03d}.{ext}"))
        rows.append((_g(t), _g(log_det(G))))
    _write_csv(os.path.join(args.out, "det.csv"), ["t", "log_det"], rows)


def _report_dict(rep):
    return {
        "method": rep.method,
        "cycles": rep.cycles,
        "final_gap": float(rep.final_gap),
        "converged": bool(rep.converged),
    }


def cmd_mean(args):
    ys = [read_matrix(f) for f in args.files]
    if args.kind == "arithmetic":
        M = means.arithmetic_mean(ys)
        report = {"method": "arithmetic", "cycles": 0, "final_gap": 0.0, "converged": True}
    else:
        if args.kind == "inductive":
            rep = means.inductive_mean(ys, tol=args.tol, max_cycles=args.max_cycles)
        else:
            rep = means.karcher_mean(ys, tol=args.tol, max_iter=args.max_cycles)
        M, report = rep.result, _report_dict(rep)
    write_matrix(M, args.out)
    _write_json(args.report or f"{args.out}.report.json", report)
    return 0 if report["converged"] else EXIT_NO_CONVERGENCE


def cmd_exp_shrinkage(args):
    cfg = ExperimentConfig(n=args.n, count=args.count, seed=args.seed, t_grid=args.t_grid,
                           out=args.out)
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for pair_id in range(cfg.count):
        X = random_spd(cfg.n, rng, unit_det=True)
        Y = random_spd(cfg.n, rng, unit_det=True)
        e, r, s = analysis.log_det_profiles(X, Y, cfg.t_grid)
        for k, t in enumerate(cfg.t_grid):
            rows.append((pair_id, _g(t), _g(e[k]), _g(r[k]), _g(s[k])))
    _write_csv(cfg.out, ["pair_id", "t", "log_det_euclid", "log_det_riem", "log_det_star"], rows)


def midpoint_rows(n, count, r_max, seed):
    """Sampled ``(r, f, bound, marker)`` rows plus one bound-attaining marker row."""
    rng = np.random.default_rng(seed)
    r = r_max * (1.0 - rng.random(count))
    logl = analysis.sample_log_spectra(n, r, rng)
    r_s, f = analysis.normalized_distances(logl)
    bound = analysis.midpoint_bound(n, r_s) / r_s
    marker = np.zeros(n)
    marker[0], marker[-1] = -r_max, r_max
    mr, mf = analysis.normalized_distances(marker)
    rows = [(r_s[i], f[i], bound[i], 0) for i in range(count)]
    rows.append((mr[0], mf[0], analysis.midpoint_bound(n, r_max) / r_max, 1))
    return rows


def cmd_exp_midpoint(args):
    rows = midpoint_rows(args.n, args.count, args.r_max, args.seed)
    _write_csv(args.out, ["r", "f", "bound", "marker"],
               [(_g(r), _g(f), _g(b), m) for r, f, b, m in rows])


def sparsity_experiment(n, k, density, seed, tol):
    """Same-pattern and distinct-pattern scenarios for the inductive and Karcher means."""
    rng = np.random.default_rng(seed)
    pattern = random_pattern(n, density, rng)
    scenarios = {
        "same_pattern": [random_sparse_spd(n, pattern=pattern, seed=rng) for _ in range(k)],
        "distinct_pattern": [random_sparse_spd(n, density, seed=rng) for _ in range(k)],
    }
    out = {}
    for name, ys in scenarios.items():
        union = means.union_pattern(ys)
        ind = means.inductive_mean(ys, tol=tol)
        kar = means.karcher_mean(ys)
        out[name] = {
            "inputs": ys,
            "union_pattern": union,
            "inductive": ind,
            "karcher": kar,
            "inductive_report": means.sparsity_report(ind.result, union),
            "karcher_report": means.sparsity_report(kar.result, union),
            "union_fill": union.size / n**2,
        }
    return out


def _sparsity_dict(rep):
    return {"out_of_pattern": rep.out_of_pattern, "nnz": rep.nnz,
            "fill_ratio": float(rep.fill_ratio)}


def cmd_exp_sparsity(args):
    res = sparsity_experiment(args.n, args.k, args.density, args.seed, args.tol)
    os.makedirs(args.out, exist_ok=True)
    summary = {"n": args.n, "k": args.k, "density": args.density, "seed": args.seed}
    for name, r in res.items():
        for j, y in enumerate(r["inputs"]):
            write_matrix(y, os.path.join(args.out, f"{name}_input_{j}.mtx"))
        write_matrix(r["inductive"].result, os.path.join(args.out, f"{name}_inductive.mtx"))
        write_matrix(r["karcher"].result, os.path.join(args.out, f"{name}_karcher.json"))
        summary[name] = {
            "union_fill": r["union_fill"],
            "inductive": {**_report_dict(r["inductive"]), **_sparsity_dict(r["inductive_report"])},
            "karcher": {**_report_dict(r["karcher"]), **_sparsity_dict(r["karcher_report"])},
        }
    _write_json(os.path.join(args.out, "report.json"), summary)


def cmd_gen(args):
    if args.sparse:
        M = random_sparse_spd(args.n, args.density, seed=args.seed)
    else:
        M = random_spd(args.n, seed=args.seed, unit_det=args.unit_det)
    write_matrix(M, args.out)


def build_parser():
    p = argparse.ArgumentParser(
        prog="spdgeom",
        description="Thompson, Hilbert and Riemannian geometry of SPD matrices.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sub = p.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    def common(sp, seed=False, tol=None, n=None, count=None):
        if seed:
            sp.add_argument("--seed", type=int, default=DEFAULT_SEED, help="random seed")
        if tol is not None:
            sp.add_argument("--tol", type=float, default=tol, help="solver tolerance")
        if n is not None:
            sp.add_argument("--n", type=int, default=n, help="matrix dimension")
        if count is not None:
            sp.add_argument("--count", type=int, default=count, help="number of samples")

    sp = sub.add_parser("dist", help="distance between two matrices", formatter_class=fmt)
    sp.add_argument("metric", choices=["riemannian", "hilbert", "thompson"])
    sp.add_argument("file_x")
    sp.add_argument("file_y")
    common(sp, tol=1e-10)
    sp.set_defaults(func=cmd_dist)

    sp = sub.add_parser("interpolate", help="points along a geodesic", formatter_class=fmt)
    sp.add_argument("kind", choices=[k.value for k in GeodesicKind])
    sp.add_argument("file_x")
    sp.add_argument("file_y")
    sp.add_argument("--t-grid", type=parse_grid, default=DEFAULT_T_GRID,
                    help="comma-separated t values")
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(func=cmd_interpolate)

    sp = sub.add_parser("mean", help="mean of matrices", formatter_class=fmt)
    sp.add_argument("kind", choices=["inductive", "karcher", "arithmetic"])
    sp.add_argument("files", nargs="+")
    sp.add_argument("--out", required=True, help="output matrix file")
    sp.add_argument("--report", help="report JSON path (default: <out>.report.json)")
    sp.add_argument("--max-cycles", type=int, default=100_000)
    common(sp, tol=1e-8)
    sp.set_defaults(func=cmd_mean)

    sp = sub.add_parser("exp-shrinkage", help="log-determinants along geodesics",
                        formatter_class=fmt)
    common(sp, seed=True, n=3, count=1000)
    sp.add_argument("--t-grid", type=parse_grid, default=DEFAULT_T_GRID)
    sp.add_argument("--out", default="-", help="CSV path or - for stdout")
    sp.set_defaults(func=cmd_exp_shrinkage)

    sp = sub.add_parser("exp-midpoint", help="normalized midpoint distances",
                        formatter_class=fmt)
    common(sp, seed=True, n=4, count=100_000)
    sp.add_argument("--r-max", type=float, default=100.0)
    sp.add_argument("--out", default="-", help="CSV path or - for stdout")
    sp.set_defaults(func=cmd_exp_midpoint)

    sp = sub.add_parser("exp-sparsity", help="sparsity of inductive vs Karcher means",
                        formatter_class=fmt)
    common(sp, seed=True, tol=1e-8, n=200)
    sp.add_argument("--k", type=int, default=5, help="number of input matrices")
    sp.add_argument("--density", type=float, default=0.02)
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(func=cmd_exp_sparsity)

    sp = sub.add_parser("gen", help="random SPD matrix to file", formatter_class=fmt)
    common(sp, seed=True, n=3)
    sp.add_argument("--unit-det", action="store_true")
    sp.add_argument("--sparse", action="store_true")
    sp.add_argument("--density", type=float, default=0.02)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_gen)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        code = args.func(args)
    except NoConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except (FactorizationFailure, SolveFailure, NonPositiveResult) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ParseError, NotSymmetric, NotPositiveDefinite, DimensionMismatch, ValueError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return code or 0


if __name__ == "__main__":
    sys.exit(main())
