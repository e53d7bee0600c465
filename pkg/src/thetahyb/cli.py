"""Command line interface.

Options fall back to ``THETAHYB_<NAME>`` environment variables, then to the
built-in defaults.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time

from .cp import cp_only_solve
from .graph import CODING_FAMILIES, coding_graph, gen_random_graph, instance_name, read_dimacs, write_dimacs
from .hybrid import HybridConfig, format_bench_tsv, format_json, format_tsv, hybrid_solve, run_bench
from .sdp import format_sparse_dump, solve_sdp
from .theta import build_theta, extract_scores, usable_upper_bound

ENV_PREFIX = "THETAHYB_"


def _env(name: str, cast, default):
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None:
        return default
    try:
        return cast(raw)
    except ValueError:
        raise SystemExit(f"invalid value for {ENV_PREFIX}{name}: {raw!r}")


def _flag(raw: str) -> bool:
    return raw.strip().lower() in ("1", "true", "yes", "on")


def _add_hybrid_options(p: argparse.ArgumentParser):
    p.add_argument("--max-discrepancy", type=int, default=_env("MAX_DISCREPANCY", int, 2))
    p.add_argument("--theta-form", choices=("x", "y"), default=_env("THETA_FORM", str, "x"))
    p.add_argument("--sdp-tol", type=float, default=_env("SDP_TOL", float, 1e-7))
    p.add_argument("--cuts", action="store_true", default=_env("CUTS", _flag, False),
                   help="re-solve the relaxation with a discrepancy cut before each level "
                        "(experimental: the cut can skip levels holding the optimum)")
    p.add_argument("--time-limit", type=float, default=_env("TIME_LIMIT", float, None),
                   help="total time limit in seconds")
    p.add_argument("--deterministic", action="store_true", default=_env("DETERMINISTIC", _flag, False))


def _config(args) -> HybridConfig:
    return HybridConfig(
        max_discrepancy=args.max_discrepancy,
        theta_variant=args.theta_form,
        sdp_tol=args.sdp_tol,
        total_time_limit=args.time_limit,
        enable_discrepancy_cuts=args.cuts,
        deterministic=args.deterministic,
    )


def cmd_solve(args) -> int:
    g = read_dimacs(args.file)
    report = hybrid_solve(g, _config(args), name=os.path.basename(args.file))
    if args.json:
        print(format_json([report]))
    else:
        print(format_tsv([report]), end="")
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 0


def cmd_cp_only(args) -> int:
    g = read_dimacs(args.file)
    r = cp_only_solve(g, args.time_limit)
    print("best\ttime\tbacktracks\tnodes\tstatus")
    best = "" if r.best_value is None else r.best_value
    print(f"{best}\t{r.elapsed:.6f}\t{r.backtracks}\t{r.nodes}\t{r.status.value}")
    return 0


def cmd_theta(args) -> int:
    g = read_dimacs(args.file)
    model = build_theta(g, args.theta_form)
    if args.dump:
        with open(args.dump, "w") as f:
            f.write(format_sparse_dump(model.problem))
    t = time.perf_counter()
    sol = solve_sdp(model.problem, tol=args.sdp_tol)
    elapsed = time.perf_counter() - t
    res = extract_scores(model, sol, g)
    print(f"theta\t{res.theta:.9f}")
    print(f"dual_obj\t{sol.dual_obj:.9f}")
    print(f"primal_obj\t{sol.primal_obj:.9f}")
    print(f"upper_bound\t{usable_upper_bound(res.theta, g)}")
    print(f"status\t{sol.status.value}")
    print(f"iterations\t{sol.iterations}")
    print(f"primal_infeasibility\t{sol.primal_infeasibility:.3e}")
    print(f"dual_infeasibility\t{sol.dual_infeasibility:.3e}")
    print(f"time\t{elapsed:.3f}")
    return 0


def cmd_gen(args) -> int:
    if args.coding:
        g = coding_graph(args.coding, args.word_length)
        comment = f"{args.coding}.{g.n}: conflict graph of single-error-correcting codes"
    else:
        if args.n is None or args.density is None:
            raise SystemExit("gen needs --n and --density (or --coding)")
        g = gen_random_graph(args.n, args.density, args.seed)
        comment = f"{instance_name(args.n, args.density)} seed={args.seed}"
    text = write_dimacs(g, comment=comment)
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_bench(args) -> int:
    rows = run_bench(args.files, _config(args), args.baseline_limit)
    text = format_bench_tsv(rows)
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    if args.strict and any(r.error for r in rows):
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thetahyb", description="Hybrid SDP/CP maximum-weight stable set solver")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="hybrid solve of one DIMACS instance")
    p.add_argument("file")
    _add_hybrid_options(p)
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true")
    fmt.add_argument("--tsv", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("cp-only", help="plain branch and bound baseline")
    p.add_argument("file")
    p.add_argument("--time-limit", type=float, default=_env("TIME_LIMIT", float, None))
    p.set_defaults(func=cmd_cp_only)

    p = sub.add_parser("theta", help="solve the theta relaxation only")
    p.add_argument("file")
    p.add_argument("--theta-form", choices=("x", "y"), default=_env("THETA_FORM", str, "x"))
    p.add_argument("--sdp-tol", type=float, default=_env("SDP_TOL", float, 1e-7))
    p.add_argument("--dump", metavar="FILE", help="write the SDP as a sparse text dump")
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("gen", help="generate an instance")
    p.add_argument("--n", type=int)
    p.add_argument("--density", type=float)
    p.add_argument("--seed", type=int, default=_env("SEED", int, 0))
    p.add_argument("--coding", choices=CODING_FAMILIES, help="coding-theory conflict graph instead of a random one")
    p.add_argument("--word-length", type=int, default=6)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="hybrid vs. plain CP on several instances")
    p.add_argument("files", nargs="*")
    _add_hybrid_options(p)
    p.add_argument("--baseline-limit", type=float, default=_env("BASELINE_LIMIT", float, 100.0))
    p.add_argument("--out")
    p.add_argument("--strict", action="store_true", help="exit nonzero if any instance failed to load")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
