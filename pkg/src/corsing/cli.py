"""Command line interface: ``corsing {solve,coherence,experiment,validate}``."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from corsing.assembly import assemble_B, dump_matrix
from corsing.coherence import MEASURE_KINDS, empirical_coherence
from corsing.experiments import (
    PRESETS,
    SOLUTIONS,
    best_s_term,
    load_config,
    make_problem,
    preset,
    relative_error,
    run_study,
    validate_suite,
)
from corsing.solver import corsing_solve, default_measure


def _field_arg(text: str):
    """``"1"``, ``"sine:1,0.5,3"`` or a comma list (one value per axis, for beta)."""
    if text.startswith("sine:"):
        return text
    parts = text.split(",")
    return float(parts[0]) if len(parts) == 1 else [float(p) for p in parts]


def _add_problem_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--problem", default="u1", choices=sorted(SOLUTIONS), help="manufactured solution")
    p.add_argument("--basis", default="ani", choices=["ani", "iso"], help="tensorization for n > 1")
    p.add_argument("--l0", type=int, default=2)
    p.add_argument("--L", type=int, default=None, help="finest level (default 9/6/4 for n = 1/2/3)")
    p.add_argument("--R", type=int, default=None, help="test truncation (default: N in 1D, 2^L otherwise)")
    p.add_argument("--eta", type=_field_arg, default=1.0)
    p.add_argument("--beta", type=_field_arg, default=None, help="default 0 in 1D, 1 per axis otherwise")
    p.add_argument("--rho", type=_field_arg, default=1.0)
    p.add_argument(
        "--measure",
        default="nonuniform",
        choices=["nonuniform", *MEASURE_KINDS],
        help="'nonuniform' is the 1D bound in 1D and the practical bound otherwise",
    )


def _problem(args):
    n = SOLUTIONS[args.problem].n
    L = args.L if args.L is not None else {1: 9, 2: 6, 3: 4}[n]
    beta = args.beta if args.beta is not None else (0.0 if n == 1 else 1.0)
    return make_problem(args.problem, args.basis, args.l0, L, args.R, args.eta, beta, args.rho)


def _cmd_solve(args) -> int:
    problem = _problem(args)
    sol, x, system = corsing_solve(
        problem, args.s, args.m, args.measure, args.seed, dedup=args.dedup, clip_K=args.clip_K
    )
    ref = problem.reference_coefficients
    out = {
        "problem": problem.describe(),
        "s": args.s,
        "m": args.m,
        "measure": args.measure,
        "seed": args.seed,
        "support": sol.support.tolist(),
        "coefficients": [[c.real, c.imag] for c in sol.coefficients],
        "residual": sol.residual_norm,
        "residual_history": sol.residual_history,
        "rel_error": relative_error(ref, x),
        "best_s_term_error": best_s_term(ref, args.s)[1],
        "tests": system.freqs.tolist(),
    }
    text = json.dumps(out, indent=1)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    if args.dump_matrix:
        dump_matrix(args.dump_matrix, assemble_B(problem), problem)
    return 0


def _cmd_coherence(args) -> int:
    problem = _problem(args)
    meas = default_measure(problem, args.measure)
    mu = empirical_coherence(assemble_B(problem))
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"q{d + 1}" for d in range(problem.n)] + ["nu", "p", "mu"])
        for q, v, p, u in zip(problem.tests, meas.bound, meas.probabilities, mu):
            w.writerow([*map(int, q), repr(float(v)), repr(float(p)), repr(float(u))])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def _cmd_experiment(args) -> int:
    overrides = {} if args.trials is None else {"trials": args.trials}
    if args.config:
        configs = load_config(args.config)
        if overrides:
            configs = [type(c).from_dict({**c.to_dict(), **overrides}) for c in configs]
    else:
        configs = preset(args.preset, **overrides)
    results = run_study(configs, args.out, seed=args.seed, record_timing=not args.no_timing, workers=args.workers)
    for st in results:
        print(
            f"{st.study_id:<14s} s={st.s:<4d} m={st.m:<4d} {st.measure:<10s} "
            f"median={st.median:.3e} best={st.best_error:.3e} ratio={st.median / st.best_error:.2f}"
        )
    return 0


def _cmd_validate(args) -> int:
    results = validate_suite(quick=args.quick)
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="corsing", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="one compressed solve; prints JSON")
    _add_problem_args(p)
    p.add_argument("--s", type=int, default=50)
    p.add_argument("--m", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dedup", action="store_true", help="merge repeated tests into weighted rows")
    p.add_argument("--clip-K", dest="clip_K", type=float, default=None)
    p.add_argument("--out", default=None, help="JSON output path (default stdout)")
    p.add_argument("--dump-matrix", default=None, help="also write the full matrix B as .npz")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("coherence", help="CSV of q, nu_q, p_q, mu_q")
    _add_problem_args(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_coherence)

    p = sub.add_parser("experiment", help="Monte-Carlo study; writes stats.csv and summary.csv")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="YAML or JSON study file")
    src.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--trials", type=int, default=None, help="override the trial count")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-timing", action="store_true", help="write runtime_ms = 0 (byte-reproducible output)")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("validate", help="run the built-in oracle checks")
    p.add_argument("--quick", action="store_true")
    p.set_defaults(func=_cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
