"""anosovlab command line: gen | certify | scan | report.

Exit codes
  0  success, or certificate verdict pass
  1  usage error, unreadable or invalid input, missing form
  2  certificate verdict fail
  3  certificate verdict inconclusive
  4  enumeration guard exceeded
  5  scan skipped more than 10% of its pairs or triples
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .certify import CSV_HEADER, Thresholds, certify, default_workers
from .exterior import DimensionError, singular_values
from .io import (atomic_write, csv_text, dumps_report, file_digest, load_representation,
                 save_representation)
from .limits import (DEFAULT_FLAG_TOL, DEFAULT_MAX_DEPTH, FlagConvergenceError, hyperconvexity_scan,
                     pairing_scan, plucker_compatibility)
from .representations import (ValidationError, complexify, exterior_power_rep, rotation_rep,
                              schottky_rep, sym_pipeline)
from .words import GuardExceeded, sample_boundary

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAIL = 2
EXIT_INCONCLUSIVE = 3
EXIT_GUARD = 4
EXIT_SKIPPED = 5

VERDICT_EXIT = {"pass": EXIT_OK, "fail": EXIT_FAIL, "inconclusive": EXIT_INCONCLUSIVE}
SKIP_LIMIT = 0.10


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fnum(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def _run_report(command: str, params: dict, results: dict, inputs, started: float, timing: bool) -> dict:
    return {
        "command": command,
        "parameters": params,
        "results": results,
        "tool_version": __version__,
        "input_digests": {str(p): file_digest(p) for p in inputs},
        "wall_time_s": round(time.perf_counter() - started, 6) if timing else None,
    }


def _load(path):
    if path is None:
        raise UsageError("--input is required")
    try:
        return load_representation(path)
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}")
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"invalid representation file {path}: {exc}")


# --------------------------------------------------------------------------
# gen


def _parse_schottky(text: str):
    try:
        n, lam = text.split(",")
        return int(n), float(lam)
    except ValueError:
        raise UsageError(f"--schottky expects RANK,LAMBDA, got {text!r}")


def cmd_gen(args) -> int:
    kind = args.construction
    if kind == "schottky":
        rep = schottky_rep(args.rank, args.lam, seed=args.seed)
    elif kind == "pipeline":
        if args.schottky is None or args.sym is None:
            raise UsageError("pipeline needs --schottky RANK,LAMBDA and --sym DIM")
        n, lam = _parse_schottky(args.schottky)
        rep = sym_pipeline(n, lam, args.sym, seed=args.seed)
    elif kind == "exterior":
        if args.k is None:
            raise UsageError("exterior needs --k")
        rep = exterior_power_rep(_load(args.input), args.k)
    elif kind == "complexify":
        rep = complexify(_load(args.input))
    elif kind == "rotation":
        rep = rotation_rep(args.rank)
    else:  # argparse restricts choices
        raise UsageError(f"unknown construction {kind}")
    rep.validate()
    save_representation(rep, args.output)
    form = "none" if rep.structure is None else ("standard" if rep.structure.is_standard() else "declared")
    print(f"wrote {args.output}: dim {rep.dim}, field {rep.field}, form {form}")
    return EXIT_OK


# --------------------------------------------------------------------------
# certify


def cmd_certify(args) -> int:
    started = time.perf_counter()
    rep = _load(args.input)
    th = Thresholds(mu_min=args.mu_min, min_radius=args.min_radius, burn_in=args.burn_in)
    cert = certify(rep, args.k, args.radius, th, cap=args.cap, workers=args.threads)
    results = cert.to_dict()
    for key in ("mu_hat", "log_c_hat", "fit_quality", "min_observed_ratio"):
        results[key] = _fnum(results[key])
    params = {"k": args.k, "radius": args.radius, "mu_min": args.mu_min, "min_radius": args.min_radius,
              "burn_in": args.burn_in, "cap": args.cap}
    report = _run_report("certify", params, results, [args.input], started, not args.no_timing)
    out = Path(args.output)
    atomic_write(out.with_suffix(".csv"), csv_text(CSV_HEADER, cert.profile.csv_rows()))
    atomic_write(out.with_suffix(".json"), dumps_report(report))
    mu = "n/a" if cert.mu_hat is None else f"{cert.mu_hat:.6g}"
    print(f"verdict {cert.verdict}: mu_hat {mu}, min ratio {cert.min_observed_ratio:.6g}")
    return VERDICT_EXIT[cert.verdict]


# --------------------------------------------------------------------------
# scan


def _scan_pairing(rep, rays, args):
    if rep.structure is None:
        raise UsageError("pairing mode needs a representation with a declared form")
    rpt = pairing_scan(rep, rays, args.depth, args.tol)
    rows = [[r.i, r.j, rpt.labels[r.i], rpt.labels[r.j], r.value, "" if r.dist is None else r.dist]
            for r in rpt.records]
    header = ["i", "j", "ray_i", "ray_j", "pairing", "distance"]
    plot = [(n, r.value) for n, r in enumerate(rpt.records)]
    results = {"pairs": rpt.total_pairs, "evaluated": len(rpt.records), "skipped": rpt.skipped_pairs,
               "minimum": _fnum(rpt.minimum), "argmin": None if rpt.argmin is None else list(rpt.argmin),
               "failed_rays": [i for i, _ in rpt.failed_rays]}
    return header, rows, plot, results, rpt.skipped_pairs, rpt.total_pairs


def _scan_hyperconvex(rep, rays, args):
    if None in (args.p, args.q, args.r):
        raise UsageError("hyperconvex mode needs --p, --q and --r")
    rpt = hyperconvexity_scan(rep, args.p, args.q, args.r, rays, args.depth, args.tol, args.max_triples)
    header = ["x", "y", "w", "gap", "antisymmetry_residual"]
    rows = [[t.x, t.y, t.w, t.gap, "" if t.antisymmetry_residual is None else t.antisymmetry_residual]
            for t in rpt.records]
    plot = [(n, t.gap) for n, t in enumerate(rpt.records)]
    total = len(rpt.records) + rpt.skipped_triples
    results = {"triples": total, "evaluated": len(rpt.records), "skipped": rpt.skipped_triples,
               "min_gap": _fnum(rpt.min_gap), "argmin": None if rpt.argmin is None else list(rpt.argmin),
               "max_antisymmetry_residual": _fnum(rpt.max_antisymmetry_residual),
               "failed_rays": sorted({f[0] for f in rpt.failed_rays})}
    return header, rows, plot, results, rpt.skipped_triples, total


def _scan_plucker(rep, rays, args):
    k = args.k or 2
    wedge = exterior_power_rep(rep, k)
    rows, plot, skipped = [], [], 0
    for n, ray in enumerate(rays):
        try:
            angle = plucker_compatibility(rep, ray, k, args.depth, args.tol, wedge_rep=wedge)
        except FlagConvergenceError:
            skipped += 1
            continue
        rows.append([n, ray.label(rep.presentation), angle])
        plot.append((n, angle))
    header = ["ray", "label", "angle"]
    worst = max((r[2] for r in rows), default=None)
    results = {"k": k, "rays": len(rays), "evaluated": len(rows), "skipped": skipped,
               "max_angle": _fnum(worst)}
    return header, rows, plot, results, skipped, len(rays)


SCANS = {"pairing": _scan_pairing, "hyperconvex": _scan_hyperconvex, "plucker": _scan_plucker}


def cmd_scan(args) -> int:
    started = time.perf_counter()
    rep = _load(args.input)
    if args.mode == "pairing" and rep.structure is None:
        raise UsageError("pairing mode needs a representation with a declared form")
    max_len = args.max_len
    rays = sample_boundary(rep.presentation, args.rays, max_len, seed=args.seed, max_overlap=args.max_overlap)
    header, rows, plot, results, skipped, total = SCANS[args.mode](rep, rays, args)
    results["ray_labels"] = [r.label(rep.presentation) for r in rays]
    params = {"mode": args.mode, "rays": args.rays, "max_len": max_len, "max_overlap": args.max_overlap,
              "depth": args.depth, "seed": args.seed, "tol": args.tol, "p": args.p, "q": args.q, "r": args.r,
              "k": args.k, "max_triples": args.max_triples}
    report = _run_report("scan", params, results, [args.input], started, not args.no_timing)
    out = Path(args.output)
    atomic_write(out.with_suffix(".csv"), csv_text(header, rows))
    atomic_write(out.with_suffix(".dat"), "".join(f"{i} {v!r}\n" for i, v in plot))
    atomic_write(out.with_suffix(".json"), dumps_report(report))
    key = {"pairing": "minimum", "hyperconvex": "min_gap", "plucker": "max_angle"}[args.mode]
    print(f"{args.mode}: {key} {results[key]}, evaluated {results['evaluated']}, skipped {skipped}")
    if total and skipped / total > SKIP_LIMIT:
        print(f"skipped {skipped} of {total}", file=sys.stderr)
        return EXIT_SKIPPED
    return EXIT_OK


# --------------------------------------------------------------------------
# report


def cmd_report(args) -> int:
    started = time.perf_counter()
    rep = _load(args.input)
    P = rep.presentation
    val = rep.validation_report()
    sv = [[_fnum(s) for s in singular_values(A, check=False).values] for A in rep.images]
    results = {
        "presentation": P.kind,
        "generators": list(P.names),
        "dimension": rep.dim,
        "field": rep.field,
        "form": None if rep.structure is None else ("standard" if rep.structure.is_standard() else "declared"),
        "provenance": rep.provenance,
        "validation": val,
        "generator_singular_values": sv,
    }
    report = _run_report("report", {}, results, [args.input], started, not args.no_timing)
    if args.output:
        atomic_write(Path(args.output).with_suffix(".json"), dumps_report(report))
    print(f"{P.kind} group on {', '.join(P.names)}: dim {rep.dim}, field {rep.field}, form {results['form']}")
    for name, s in zip(P.names, sv):
        print(f"  {name}: singular values " + " ".join(f"{x:.6g}" for x in s))
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="anosovlab", description=__doc__.split("\n")[0],
                     epilog=__doc__.split("\n", 2)[2], formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"anosovlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen", help="write a representation file")
    gen.add_argument("construction", choices=["schottky", "pipeline", "exterior", "complexify", "rotation"])
    gen.add_argument("--output", "-o", required=True)
    gen.add_argument("--rank", type=int, default=2)
    gen.add_argument("--lambda", dest="lam", type=float, default=4.0)
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--schottky", help="RANK,LAMBDA for the pipeline")
    gen.add_argument("--sym", type=int, help="target dimension of the symmetric power")
    gen.add_argument("--input", "-i")
    gen.add_argument("--k", type=int)
    gen.set_defaults(func=cmd_gen)

    cert = sub.add_parser("certify", help="singular value gap certificate")
    cert.add_argument("--input", "-i", required=True)
    cert.add_argument("--output", "-o", required=True, help="path stem for .json and .csv")
    cert.add_argument("--k", type=int, default=1)
    cert.add_argument("--radius", type=int, default=6)
    cert.add_argument("--mu-min", type=float, default=Thresholds.mu_min)
    cert.add_argument("--min-radius", type=int, default=Thresholds.min_radius)
    cert.add_argument("--burn-in", type=int, default=Thresholds.burn_in)
    cert.add_argument("--cap", type=int, default=10**6)
    cert.add_argument("--threads", type=int, default=None)
    cert.add_argument("--no-timing", action="store_true", help="omit wall time from the report")
    cert.set_defaults(func=cmd_certify)

    scan = sub.add_parser("scan", help="limit map scans over sampled boundary rays")
    scan.add_argument("--input", "-i", required=True)
    scan.add_argument("--output", "-o", required=True, help="path stem for .json, .csv and .dat")
    scan.add_argument("--mode", choices=sorted(SCANS), default="pairing")
    scan.add_argument("--rays", type=int, default=20)
    scan.add_argument("--max-len", type=int, default=6)
    scan.add_argument("--max-overlap", type=int, default=2)
    scan.add_argument("--depth", type=int, default=DEFAULT_MAX_DEPTH)
    scan.add_argument("--seed", type=int, default=0)
    scan.add_argument("--tol", type=float, default=DEFAULT_FLAG_TOL)
    scan.add_argument("--p", type=int)
    scan.add_argument("--q", type=int)
    scan.add_argument("--r", type=int)
    scan.add_argument("--k", type=int, help="subspace dimension for plucker mode (default 2)")
    scan.add_argument("--max-triples", type=int)
    scan.add_argument("--no-timing", action="store_true", help="omit wall time from the report")
    scan.set_defaults(func=cmd_scan)

    rpt = sub.add_parser("report", help="summarize a representation file")
    rpt.add_argument("--input", "-i", required=True)
    rpt.add_argument("--output", "-o")
    rpt.add_argument("--no-timing", action="store_true")
    rpt.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors, --help and --version
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if getattr(args, "threads", None) is None and hasattr(args, "threads"):
        args.threads = default_workers()
    try:
        return args.func(args)
    except GuardExceeded as exc:
        print(f"guard exceeded: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (UsageError, ValidationError, DimensionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
