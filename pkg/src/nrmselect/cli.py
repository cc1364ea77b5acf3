"""Command-line interface: ``nrmselect {gen,select,solve,sweep}``."""

import argparse
import sys

from . import io
from .duality import lambda_max
from .errors import NrmError
from .experiment import (
    ExperimentConfig, generate_dataset, load_config, rank_monotone, run_sweep, with_overrides,
)
from .plot import emit_plot
from .problem import NrmProblem
from .selection import (
    EMPTY, RADIUS_RULES, gap_ball_certificate, rank_bound_for_lambda, select,
)
from .solver import lipschitz_estimate, numerical_rank, solve_nrm


def _common(p):
    p.add_argument("--config", help="experiment config file (INI key = value)")
    p.add_argument("--data", help="dataset file (NRMD binary) instead of generating one")
    p.add_argument("--loss", choices=["ls", "huber"])
    p.add_argument("--kappa", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--rule", choices=RADIUS_RULES,
                   help="gap-ball radius rule (default: strict)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nrmselect",
        description="Regularization parameter selection for nuclear-norm regularized recovery.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic dataset")
    _common(p)
    p.add_argument("--out", required=True, help="output dataset path")

    p = sub.add_parser("select", help="print lambda_max and the lambda_k sequence")
    _common(p)

    p = sub.add_parser("solve", help="solve at a single lambda")
    _common(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)

    p = sub.add_parser("sweep", help="run a lambda sweep")
    _common(p)
    p.add_argument("--out-csv")
    p.add_argument("--out-svg")
    p.add_argument("--jobs", type=int, default=1)
    return parser


def _config(args):
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    return with_overrides(cfg, loss=args.loss, kappa=args.kappa, seed=args.seed,
                          out_csv=getattr(args, "out_csv", None),
                          out_svg=getattr(args, "out_svg", None), rule=args.rule)


def _data(args, cfg):
    if args.data:
        return io.load_dataset(args.data)
    return generate_dataset(cfg)


def cmd_gen(args, out):
    cfg = _config(args)
    data = generate_dataset(cfg)
    io.save_dataset(data, args.out)
    print(f"wrote {args.out}: n={data.n} p={data.p} q={data.q}", file=out)


def cmd_select(args, out):
    cfg = _config(args)
    data = _data(args, cfg)
    coef, seq = select(data, cfg.loss, cfg.rule)
    print(f"loss={cfg.loss.family} rule={cfg.rule}", file=out)
    print(f"lambda_max={coef.lambda_max!r}", file=out)
    print(f"b={coef.b!r} c={coef.c!r} d={coef.d!r}", file=out)
    print("k\tkind\tlower\tupper", file=out)
    for e in seq.entries:
        if e.kind == EMPTY:
            continue
        print(f"{e.k}\t{e.kind}\t{e.lower!r}\t{'' if e.upper is None else repr(e.upper)}", file=out)
    if not seq.defined():
        print("(no k certified below lambda_max)", file=out)


def cmd_solve(args, out):
    cfg = _config(args)
    data = _data(args, cfg)
    prob = NrmProblem(data, cfg.loss, args.lam)
    sol = solve_nrm(prob, cfg.solver, lipschitz=lipschitz_estimate(data))
    _, seq = select(data, cfg.loss, cfg.rule)
    cf = rank_bound_for_lambda(seq, args.lam)
    gb = gap_ball_certificate(data, cfg.loss, sol.pair, cfg.rule)
    print(f"lambda={args.lam!r} lambda_max={lambda_max(data, cfg.loss)!r}", file=out)
    print(f"objective={sol.objective!r} gap={sol.final_gap!r} iterations={sol.iterations} "
          f"converged={sol.converged}", file=out)
    print(f"solved_rank={numerical_rank(sol.B, cfg.rank_tol)}", file=out)
    print(f"closed_form_bound={cf.bound} gap_ball_bound={gb.bound}", file=out)


def cmd_sweep(args, out):
    cfg = _config(args)
    data = io.load_dataset(args.data) if args.data else None
    result = run_sweep(cfg, data=data, jobs=args.jobs)
    if cfg.out_csv:
        with open(cfg.out_csv, "w", encoding="utf-8", newline="") as fh:
            io.write_sweep_csv(result, fh)
    else:
        out.write(io.sweep_csv_text(result))
    if cfg.out_svg and result.rows:
        emit_plot(result.rows, cfg.out_svg, lambda_max=result.lambda_max,
                  boundaries=result.boundaries(),
                  title=f"{cfg.loss.family}: rank vs lambda")
    unsound = [r for r in result.rows if not r.sound]
    if unsound:
        print(f"error: {len(unsound)} rows exceed their certified rank", file=sys.stderr)
        return 2
    if not rank_monotone(result.rows):
        print("warning: solved rank is not monotone in lambda", file=sys.stderr)
    return 0


COMMANDS = {"gen": cmd_gen, "select": cmd_select, "solve": cmd_solve, "sweep": cmd_sweep}


def main(argv=None, out=None):
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out) or 0
    except (NrmError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
