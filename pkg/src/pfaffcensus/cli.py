"""Command-line interface.

Commands:
    params     derived exponents of a monomial support
    bounds     evaluate counting bounds (bidegree or pfaff pipeline)
    census     exact/certified census of a curve over an H schedule
    cover      determinant cover of a curve's points (or a points file)
    verify     full census + cover + bound run, artifacts to a directory
    threshold  crossover height past which the pipeline beats exp(5 sqrt(log H))

Outputs are deterministic for fixed inputs (the census timing column is
informational only).  The environment variable PFAFF_CENSUS_SEED is
reserved; no command consumes randomness.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from pathlib import Path

from .bounds import (algebraic_count_bound, pfaff_crossover, pfaff_pipeline,
                     pfaff_report, uniform_pfaff_bound)
from .census import CurveSpec, PrecisionPolicy
from .cover import (PreconditionError, block_cover, cover_count_bound,
                    cover_report_to_json)
from .enclosures import format_decimal, parse_number
from .monomials import MonomialSet, box_set, parameters, total_degree_set
from .rationals import format_rational, parse_point
from .report import write_verification_artifacts, write_census_csv
from .verify import run_verification


def _monomial_set(args) -> MonomialSet:
    if args.box is not None:
        return box_set(args.box[0], args.box[1])
    if args.total_degree is not None:
        return total_degree_set(args.total_degree)
    raise PreconditionError("choose a support: --box B G or --total-degree D")


def _h_list(text: str) -> list[int]:
    out = [int(t) for t in text.split(",") if t.strip()]
    if not out or any(b <= 0 for b in out) or out != sorted(set(out)):
        raise PreconditionError(
            "--H must be a strictly increasing list of positive integers")
    return out


def _load_spec(path: str) -> CurveSpec:
    with open(path) as fh:
        obj = json.load(fh)
    return CurveSpec.from_json(obj, default_id=Path(path).stem)


def _add_common(p, h=True):
    p.add_argument("--box", nargs=2, type=int, metavar=("B", "G"),
                   help="box support 0<=h<B, 0<=k<G")
    p.add_argument("--total-degree", type=int, metavar="D",
                   help="total-degree support h+k<=D")
    if h:
        p.add_argument("--H", required=True,
                       help="comma-separated strictly increasing heights")
    p.add_argument("--out", help="output path (directory for verify)")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker processes for the census sweep")
    p.add_argument("--precision", type=int, default=64,
                   help="starting precision (bits) for certified evaluation")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pfaffcensus",
        description="Exact censuses, determinant covers, and certified "
                    "counting bounds for plane curves.",
        epilog="PFAFF_CENSUS_SEED is reserved (unused: randomness only in "
               "property tests).")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="derived exponents of a support")
    p.add_argument("--box", nargs=2, type=int, metavar=("B", "G"))
    p.add_argument("--total-degree", type=int, metavar="D")
    p.add_argument("--out")

    p = sub.add_parser("bounds", help="evaluate counting bounds")
    p.add_argument("--thm", choices=["bidegree", "pfaff"], required=True,
                   help="bidegree: (6d)^10 4^d H^(2/d) (log H)^5; "
                        "pfaff: pipeline minimum and exp(5 sqrt(log H))")
    p.add_argument("--b", type=int, help="x-degree (bidegree bound)")
    p.add_argument("--c", type=int, help="y-degree (bidegree bound)")
    p.add_argument("--r", type=int, help="chain order (pfaff)")
    p.add_argument("--alpha", type=int, help="chain degree (pfaff)")
    p.add_argument("--beta", type=int, help="function degree (pfaff)")
    p.add_argument("--d", type=int, help="fix the auxiliary degree (pfaff)")
    p.add_argument("--H", required=True)
    p.add_argument("--out")

    p = sub.add_parser("census", help="census a curve over an H schedule")
    p.add_argument("--curve", required=True, help="curve-spec JSON path")
    _add_common(p)

    p = sub.add_parser("cover", help="determinant cover of census points")
    p.add_argument("--curve", help="curve-spec JSON path")
    p.add_argument("--points", help="file of 'p/q,r/s' lines")
    p.add_argument("--L", help="length for the count bound (rational)")
    _add_common(p)

    p = sub.add_parser("verify", help="census + covers + bounds, with artifacts")
    p.add_argument("--curve", required=True, help="curve-spec JSON path")
    p.add_argument("--no-figures", action="store_true",
                   help="skip rendering report figures")
    _add_common(p)

    p = sub.add_parser("threshold", help="pipeline/envelope crossover height")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--alpha", type=int, required=True)
    p.add_argument("--beta", type=int, required=True)
    p.add_argument("--probes", type=int, default=64)
    p.add_argument("--out")
    return ap


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_params(args) -> int:
    M = _monomial_set(args)
    p = parameters(M)
    if p.rho is None:
        line = f"D={p.D} R={p.R} S={p.S} rho/sigma/C unavailable (D=1)\n"
    else:
        line = (f"D={p.D} R={p.R} S={p.S} "
                f"rho={format_rational(p.rho)} sigma={format_rational(p.sigma)} "
                f"C<={format_decimal(p.c_upper, 4, 'up')}\n")
    if args.total_degree is not None:
        d = args.total_degree
        line += (f"note: D=(d+1)(d+2)/2={p.D} for total degree d={d}; the "
                 f"d(d-1)/2={d*(d-1)//2} shorthand does not describe this "
                 "support, while rho=8/(3(d+3)) and sigma=3rho hold exactly\n")
    _emit(line, args.out)
    return 0


def cmd_bounds(args) -> int:
    hs = _h_list(args.H)
    rows = []
    if args.thm == "bidegree":
        if args.b is None or args.c is None:
            raise PreconditionError("--thm bidegree requires --b and --c")
        for H in hs:
            v = algebraic_count_bound(args.b, args.c, H)
            rows.append(["-", H, "", "bidegree_bound",
                         format_decimal(v, 4, "up"), ""])
    else:
        if None in (args.r, args.alpha, args.beta):
            raise PreconditionError("--thm pfaff requires --r --alpha --beta")
        for H in hs:
            if args.d is not None:
                v = pfaff_pipeline(args.r, args.alpha, args.beta, H, args.d)
                rows.append(["-", H, "", f"pipeline_d{args.d}",
                             format_decimal(v, 4, "up"), ""])
            else:
                rep = pfaff_report(args.r, args.alpha, args.beta, H)
                rows.append(["-", H, "", f"pipeline_min_d{rep.d_star}",
                             format_decimal(rep.pipeline_value, 4, "up"), ""])
            env = uniform_pfaff_bound(H)
            rows.append(["-", H, "", "uniform_envelope",
                         format_decimal(env.hi, 4, "up"), ""])
    lines = ["curve_id,H,N_empirical,bound_name,bound_value,ratio"]
    lines += [",".join(str(c) for c in row) for row in rows]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_census(args) -> int:
    spec = _load_spec(args.curve)
    policy = PrecisionPolicy(start=args.precision,
                             maximum=max(1024, args.precision))
    recs = [spec.census(H, jobs=args.jobs, policy=policy)
            for H in _h_list(args.H)]
    lines = ["curve_id,H,N,status,seconds"]
    lines += [f"{r.curve_id},{r.H},{r.n},{r.status},{r.seconds:.3f}"
              for r in recs]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_cover(args) -> int:
    M = _monomial_set(args)
    hs = _h_list(args.H)
    if len(hs) != 1:
        raise PreconditionError("cover takes a single --H value")
    H = hs[0]
    if args.points:
        with open(args.points) as fh:
            pts = [parse_point(line) for line in fh if line.strip()]
    elif args.curve:
        spec = _load_spec(args.curve)
        rec = spec.census(H, jobs=args.jobs)
        pts = rec.points or []
    else:
        raise PreconditionError("cover requires --curve or --points")
    pts = [p for p in pts if p.height() <= H]
    L = parse_number(args.L) if args.L else None
    report = block_cover(pts, M, H=H, L=L)
    _emit(json.dumps(cover_report_to_json(report, pts), indent=1,
                     sort_keys=True) + "\n", args.out)
    return 0 if report.within_bound() else 1


def cmd_verify(args) -> int:
    spec = _load_spec(args.curve)
    M = _monomial_set(args)
    policy = PrecisionPolicy(start=args.precision,
                             maximum=max(1024, args.precision))
    bundle = run_verification(spec, _h_list(args.H), M,
                              jobs=args.jobs, policy=policy)
    if args.out:
        write_verification_artifacts(Path(args.out), bundle,
                                     figures=not args.no_figures)
    summary = [f"curve={bundle['curve']} pass={bundle['pass']}"]
    for rec in bundle["records"]:
        flags = " ".join(f"{k}={v}" for k, v in sorted(rec["flags"].items()))
        summary.append(f"H={rec['H']} N={rec['n']} {flags}")
    sys.stdout.write("\n".join(summary) + "\n")
    return 0 if bundle["pass"] else 1


def cmd_threshold(args) -> int:
    cr = pfaff_crossover(args.r, args.alpha, args.beta, probes=args.probes)
    digits = int(cr.k * 0.30103) + 1
    lines = [
        f"crossover(r={args.r},alpha={args.alpha},beta={args.beta}) = 2^{cr.k} "
        f"(~{digits} digits)",
        f"probes_ok={cr.probes_ok}",
        f"log_ratio_at_top_probe<={format_decimal(cr.top_ratio_log_upper, 4, 'up')}",
    ]
    _emit("\n".join(lines) + "\n", args.out)
    return 0 if cr.probes_ok else 1


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "params":
            return cmd_params(args)
        if args.command == "bounds":
            return cmd_bounds(args)
        if args.command == "census":
            return cmd_census(args)
        if args.command == "cover":
            return cmd_cover(args)
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "threshold":
            return cmd_threshold(args)
        raise AssertionError("unreachable")
    except (PreconditionError, KeyError, FileNotFoundError,
            json.JSONDecodeError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except ArithmeticError as exc:
        sys.stderr.write(f"internal error: {exc}\n")
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
