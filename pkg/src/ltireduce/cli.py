"""Command-line interface.

Subcommands: `sample` (generate grids / built-in examples to a samples
file), `reduce` (run the two-stage pipeline), `diagnose` (diagnostics for
a system file), `eval` (tabulate a system's frequency response). Exit
codes: 0 success, 2 usage error, 3 numerical failure (the failing error
class is named on stderr).

MOR_NUM_THREADS caps internal parallelism; all scans in this
implementation are sequential, which complies with any cap.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import fileio
from .core import SampleSet
from .errors import ReductionError
from .pipeline import PipelineConfig, make_grid, reduce_two_stage
from .sampling import (
    hermitian_test_system,
    hilbert_samples,
    sample_system,
)

__all__ = ["cli_main", "main"]


def _parse_grid(text: str):
    kind, _, rest = text.partition(":")
    try:
        if kind == "moebius":
            return ("moebius", int(rest))
        if kind == "log":
            a, b, n = rest.split(",")
            return ("log", float(a), float(b), int(n))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(
        f"bad grid spec {text!r}; expected moebius:N or log:A,B,N"
    )


def _parse_degree(text: str):
    kind, _, rest = text.partition(":")
    try:
        if kind == "fixed":
            return ("fixed", int(rest))
        if kind == "adaptive":
            tol, dmax = rest.split(",")
            return ("adaptive", float(tol), int(dmax))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(
        f"bad degree spec {text!r}; expected fixed:D or adaptive:TOL,DMAX"
    )


def _parse_lambda(text: str):
    if text == "auto":
        return "auto"
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad lambda {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("lambda must be >= 0")
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ltireduce",
        description="Two-stage LTI model order reduction from transfer-function samples.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sample = sub.add_parser("sample", help="generate a samples file")
    src = p_sample.add_mutually_exclusive_group(required=True)
    src.add_argument("--example", choices=["hilbert", "hermitian"])
    src.add_argument("--system", help="sample this system file instead of an example")
    p_sample.add_argument(
        "--params",
        default="1e-6,1e-2,0",
        help="EPS,DELTA,SEED for --example hermitian",
    )
    p_sample.add_argument("--grid", type=_parse_grid, required=True)
    p_sample.add_argument("--out", required=True)

    p_reduce = sub.add_parser("reduce", help="run the two-stage pipeline")
    p_reduce.add_argument("--samples", required=True)
    p_reduce.add_argument("--rank", type=int, required=True)
    p_reduce.add_argument("--lambda", dest="lam", type=_parse_lambda, default="auto")
    p_reduce.add_argument("--epsilon", type=float, default=None)
    p_reduce.add_argument("--gamma", type=float, default=None)
    p_reduce.add_argument(
        "--degree", type=_parse_degree, default=("adaptive", 1e-8, 60)
    )
    p_reduce.add_argument("--grid", type=_parse_grid, default=("moebius", 512))
    p_reduce.add_argument("--u-mode", choices=["modified", "glover"], default="modified")
    p_reduce.add_argument("--seed", type=int, default=0)
    p_reduce.add_argument("--out", required=True)
    p_reduce.add_argument("--report", default=None)

    p_diag = sub.add_parser("diagnose", help="diagnostics for a system file")
    p_diag.add_argument("--system", required=True)
    p_diag.add_argument("--rank", type=int, required=True)
    p_diag.add_argument("--epsilon", type=float, default=None)
    p_diag.add_argument("--gamma", type=float, default=None)
    p_diag.add_argument("--grid", type=_parse_grid, default=("moebius", 512))
    p_diag.add_argument("--u-mode", choices=["modified", "glover"], default="modified")
    p_diag.add_argument("--report", default=None)

    p_eval = sub.add_parser("eval", help="tabulate a system's frequency response")
    p_eval.add_argument("--system", required=True)
    p_eval.add_argument("--grid", type=_parse_grid, required=True)
    p_eval.add_argument("--out", required=True)
    return parser


def _cmd_sample(args) -> int:
    grid = make_grid(args.grid)
    if args.system:
        sys_ = fileio.read_system(args.system)
        samples = sample_system(sys_, grid)
    elif args.example == "hilbert":
        samples = hilbert_samples(grid)
    else:
        eps, delta, seed = args.params.split(",")
        sys_ = hermitian_test_system(float(eps), float(delta), int(seed))
        samples = sample_system(sys_, grid)
    fileio.write_samples(args.out, samples)
    print(f"wrote {samples.N} samples (p={samples.p}, m={samples.m}) to {args.out}")
    return 0


def _cmd_reduce(args) -> int:
    samples = fileio.read_samples(args.samples)
    cfg = PipelineConfig(
        k=args.rank,
        lam=args.lam,
        epsilon=args.epsilon,
        gamma=args.gamma,
        d_policy=args.degree,
        grid=args.grid,
        seed=args.seed,
        u_mode=args.u_mode,
    )
    final, report = reduce_two_stage(samples, cfg)
    fileio.write_system(args.out, final)
    if args.report:
        fileio.write_json(args.report, report.to_dict())
    print(
        f"reduced to rank {final.n} (target {args.rank}); "
        f"E1={report.e1:.3e}, surrogate={report.hinf_surrogate:.3e}"
    )
    return 0


def _cmd_diagnose(args) -> int:
    from .core import balanced_realization, hankel_singular_values
    from .diagnostics import full_diagnostics
    from .hna import hna_reduce, select_cluster
    from .stabilize import split_stable

    sys_ = fileio.read_system(args.system)
    if not sys_.is_stable():
        sys_ = split_stable(sys_).stable
        print("input was unstable; diagnosing its stable part", file=sys.stderr)
    sigma = hankel_singular_values(sys_)
    eps = args.epsilon if args.epsilon is not None else 1e-9 * float(sigma[0])
    gamma = args.gamma if args.gamma is not None else 1e-10 * float(sigma[0])
    sel = select_cluster(sigma, args.rank, eps)
    bal = balanced_realization(sys_, cluster=(sel.j1, sel.j2))
    run = hna_reduce(bal, args.rank, eps, gamma, args.u_mode)
    diag = full_diagnostics(run, make_grid(args.grid))
    payload = diag.to_dict()
    if args.report:
        fileio.write_json(args.report, payload)
    else:
        import json

        print(json.dumps(payload, sort_keys=True, indent=1))
    return 0


def _cmd_eval(args) -> int:
    sys_ = fileio.read_system(args.system)
    grid = make_grid(args.grid)
    samples = sample_system(sys_, grid)
    fileio.write_samples(args.out, samples)
    print(f"wrote {samples.N} response rows to {args.out}")
    return 0


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {
        "sample": _cmd_sample,
        "reduce": _cmd_reduce,
        "diagnose": _cmd_diagnose,
        "eval": _cmd_eval,
    }
    try:
        return handlers[args.command](args)
    except ReductionError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except (OSError, ValueError, KeyError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
