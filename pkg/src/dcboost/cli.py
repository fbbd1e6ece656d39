"""Command-line interface.

Subcommands: ``solve`` (single run), ``check`` (d-stationarity test),
``table1`` (basin-count experiment), ``cluster`` (paired clustering
comparison), ``gen`` (synthetic CSV data).  Results go to JSON and CSV
files whose bytes are reproducible: seeds default to 0 (overridable via
the ``DCBOOST_SEED`` environment variable; an explicit ``--seed`` flag
wins), floats are serialized with shortest round-trip precision, and
measured wall times are written only when ``--timings`` is passed, since
they are the one thing that cannot be reproduced byte-for-byte.

Exit codes: 0 success, 1 internal/oracle failure, 2 usage error,
3 negative verdict from ``check``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Optional

import numpy as np

from dcboost.bench import (
    ALGORITHMS,
    ExperimentSpec,
    run_pairwise_mssc,
    run_table1,
    make_pss,
)
from dcboost.core import ProblemDefinitionError, SolverParams
from dcboost.problems.example2d import CRITICAL_POINTS, Example2dProblem
from dcboost.problems.mssc import ClusterData, MsscProblem, generate_blobs, load_points_csv
from dcboost.solvers import check_d_stationarity, run_bdca, run_bdca_plus, run_dca

_EXIT_OK = 0
_EXIT_FAILURE = 1
_EXIT_USAGE = 2
_EXIT_NOT_STATIONARY = 3


def _fmt(value) -> str:
    """CSV cell formatting: shortest round-trip floats, 'nan' for missing."""
    if value is None:
        return "nan"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path: str, rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: Optional[str], payload) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _parse_floats(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise ValueError(f"could not parse {text!r} as comma-separated numbers")


def _parse_blob_spec(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        n_blobs, per = int(a), int(b)
    except ValueError:
        raise ValueError(f"--blobs expects 'NxP' (e.g. 4x200), got {text!r}")
    if n_blobs < 1 or per < 1:
        raise ValueError("--blobs counts must be positive")
    return n_blobs, per


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("DCBOOST_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"DCBOOST_SEED must be an integer, got {env!r}")
    return 0


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    grp = p.add_argument_group("solver parameters")
    grp.add_argument("--alpha", type=float, default=None)
    grp.add_argument("--beta1", type=float, default=None)
    grp.add_argument("--beta2", type=float, default=None)
    grp.add_argument("--eps1", type=float, default=None)
    grp.add_argument("--eps2", type=float, default=None)
    grp.add_argument("--mu-bar", dest="mu_bar", type=float, default=None)
    grp.add_argument("--eta", type=float, default=None)
    grp.add_argument("--tau", type=float, default=None)
    grp.add_argument("--gamma", type=float, default=None)
    grp.add_argument(
        "--lambda-bar1", dest="lambda_bar1", type=float, default=None
    )
    grp.add_argument("--max-iter", dest="max_iter", type=int, default=None)


def _params_from_args(args) -> SolverParams:
    overrides = {
        name: getattr(args, name)
        for name in (
            "alpha",
            "beta1",
            "beta2",
            "eps1",
            "eps2",
            "mu_bar",
            "eta",
            "tau",
            "gamma",
            "lambda_bar1",
            "max_iter",
        )
        if getattr(args, name, None) is not None
    }
    return SolverParams(**overrides)


def _add_mssc_flags(p: argparse.ArgumentParser) -> None:
    grp = p.add_argument_group("clustering problem")
    grp.add_argument("--data", help="CSV file with one 'x,y' point per line")
    grp.add_argument("--blobs", help="synthetic data spec 'NxP' (N blobs, P points each)")
    grp.add_argument("--k", type=int, help="number of centroids")
    grp.add_argument("--rho", type=float, default=None, help="strong convexity modulus (default 1/(n*k))")
    grp.add_argument("--spread", type=float, default=1.0, help="blob standard deviation")
    grp.add_argument(
        "--box",
        default="-10,-10,10,10",
        help="blob-center box as xmin,ymin,xmax,ymax",
    )
    grp.add_argument("--blob-seed", dest="blob_seed", type=int, default=0)


def _load_cluster_data(args) -> ClusterData:
    if args.data and args.blobs:
        raise ValueError("use either --data or --blobs, not both")
    if args.data:
        return load_points_csv(args.data)
    if args.blobs:
        n_blobs, per = _parse_blob_spec(args.blobs)
        box = _parse_floats(args.box)
        if box.shape[0] % 2 != 0:
            raise ValueError("--box needs an even number of coordinates")
        half = box.shape[0] // 2
        return generate_blobs(
            n_blobs,
            per,
            spread=args.spread,
            box=(tuple(box[:half]), tuple(box[half:])),
            seed=args.blob_seed,
        )
    raise ValueError("clustering needs --data or --blobs")


def _build_problem(args, seed: int):
    """Returns (problem, x0)."""
    if args.problem == "example2d":
        problem = Example2dProblem(sign_at_zero=args.sign_at_zero)
    else:
        data = _load_cluster_data(args)
        if args.k is None:
            raise ValueError("--k is required for the clustering problem")
        problem = MsscProblem(data, args.k, args.rho)
    if getattr(args, "x0", None):
        x0 = _parse_floats(args.x0)
        if x0.shape[0] != problem.dim:
            raise ValueError(
                f"--x0 has length {x0.shape[0]}, problem dimension is {problem.dim}"
            )
    elif args.problem == "example2d":
        rng = np.random.default_rng((seed, 0))
        x0 = rng.uniform(-1.5, 1.5, 2)
    else:
        rng = np.random.default_rng((seed, 0))
        x0 = problem.sample_start(rng)
    return problem, x0


def cmd_solve(args) -> int:
    seed = _resolve_seed(args)
    params = _params_from_args(args)
    problem, x0 = _build_problem(args, seed)
    if args.algo == "dca":
        result = run_dca(problem, x0, params)
    elif args.algo == "bdca":
        result = run_bdca(problem, x0, params)
    else:
        pss = make_pss(args.pss, problem.dim)
        result = run_bdca_plus(problem, x0, pss, params)
    payload = {
        "algorithm": args.algo,
        "problem": args.problem,
        "x0": x0.tolist(),
        "final_point": result.final_point.tolist(),
        "final_phi": result.final_phi,
        "termination": result.termination.value,
        "iterations": [r.to_dict() for r in result.iterations],
        "dfo_invocations": result.dfo_invocations,
        "wall_time_s": result.wall_time if args.timings else None,
    }
    _write_json(args.json, payload)
    if args.trace_csv:
        rows: list[list] = [["k", "phi_x", "phi_y", "norm_d", "lambda", "mu_event"]]
        for rec in result.iterations:
            if rec.dfo_event is None:
                mu_event = ""
            elif rec.dfo_event.mu_accepted is not None:
                mu_event = repr(rec.dfo_event.mu_accepted)
            else:
                mu_event = "certified"
            rows.append(
                [
                    rec.k,
                    rec.phi_x,
                    rec.phi_y,
                    float(np.linalg.norm(rec.d_k)),
                    rec.lambda_k,
                    mu_event,
                ]
            )
        _write_csv(args.trace_csv, rows)
    return _EXIT_OK


def cmd_check(args) -> int:
    if args.problem == "example2d":
        problem = Example2dProblem(sign_at_zero=args.sign_at_zero)
    else:
        data = _load_cluster_data(args)
        if args.k is None:
            raise ValueError("--k is required for the clustering problem")
        problem = MsscProblem(data, args.k, args.rho)
    point = _parse_floats(args.point)
    if point.shape[0] != problem.dim:
        raise ValueError(
            f"--point has length {point.shape[0]}, problem dimension is {problem.dim}"
        )
    pss = make_pss(args.pss, problem.dim)
    report = check_d_stationarity(problem, point, pss, tol=args.tol, fd_step=args.fd_step)
    _write_json(args.json, report.to_dict())
    return _EXIT_OK if report.is_d_stationary else _EXIT_NOT_STATIONARY


def cmd_table1(args) -> int:
    seed = _resolve_seed(args)
    params = _params_from_args(args)
    report = run_table1(
        args.starts, seed, params, workers=args.workers, pss_kind=args.pss
    )
    labels = [label for label, _ in CRITICAL_POINTS] + ["unclassified"]
    rows: list[list] = [["algorithm"] + labels]
    for algo in ALGORITHMS:
        rows.append([algo] + [report.basin_counts[algo][label] for label in labels])
    _write_csv(args.csv, rows)
    _write_json(args.json, report.to_dict(include_timings=args.timings))
    return _EXIT_OK


def cmd_cluster(args) -> int:
    seed = _resolve_seed(args)
    params = _params_from_args(args)
    data = _load_cluster_data(args)
    if args.k is None:
        raise ValueError("--k is required for the clustering problem")
    spec = ExperimentSpec(
        problem_id="mssc",
        algorithms=("DCA", "BDCA+"),
        n_starts=args.starts,
        seed=seed,
        pss_kind=args.pss,
        params=params,
        k=args.k,
        data=data,
        rho=args.rho,
    )
    report = run_pairwise_mssc(spec, workers=args.workers)
    rows: list[list] = [
        [
            "instance",
            "phi_dca",
            "phi_bdcaplus",
            "gap",
            "iters_dca",
            "iters_bdcaplus",
            "dfo_invocations",
            "time_ratio",
        ]
    ]
    for p in report.pairs:
        rows.append(
            [
                p.instance,
                p.phi_dca,
                p.phi_bdca_plus,
                p.gap,
                p.iters_dca,
                p.iters_bdca_plus,
                p.dfo_invocations,
                p.time_ratio if args.timings else None,
            ]
        )
    _write_csv(args.csv, rows)
    stats = report.paired_stats
    _write_json(
        args.json,
        {
            "problem": "mssc",
            "k": args.k,
            "n_starts": args.starts,
            "seed": seed,
            "pss": args.pss,
            "paired_stats": stats.to_dict(),
        },
    )
    return _EXIT_OK


def cmd_gen(args) -> int:
    seed = _resolve_seed(args)
    n_blobs, per = _parse_blob_spec(args.blobs)
    box = _parse_floats(args.box)
    if box.shape[0] % 2 != 0:
        raise ValueError("--box needs an even number of coordinates")
    half = box.shape[0] // 2
    data = generate_blobs(
        n_blobs,
        per,
        spread=args.spread,
        box=(tuple(box[:half]), tuple(box[half:])),
        seed=seed,
    )
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(
            f"# blobs={args.blobs} spread={_fmt(args.spread)} "
            f"box={args.box} seed={seed}\n"
        )
        for p in data.points:
            fh.write(f"{_fmt(p[0])},{_fmt(p[1])}\n")
    return _EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dcboost",
        description="DC solvers with line-search boosting and a direct-search escape step.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run one solver from one start")
    p_solve.add_argument("--problem", choices=["example2d", "mssc"], required=True)
    p_solve.add_argument("--algo", choices=["dca", "bdca", "bdca+"], required=True)
    p_solve.add_argument("--x0", help="comma-separated start (e.g. --x0=0,1)")
    p_solve.add_argument("--seed", type=int, default=None, help="random start seed (used when --x0 is absent)")
    p_solve.add_argument("--pss", choices=["d1", "d2", "d3"], default="d1")
    p_solve.add_argument("--sign-at-zero", dest="sign_at_zero", type=float, default=1.0)
    p_solve.add_argument("--json", default=None, help="result path (default: stdout)")
    p_solve.add_argument("--trace-csv", dest="trace_csv", default=None, help="per-iteration CSV path")
    p_solve.add_argument("--timings", action="store_true", help="include measured wall time (breaks byte reproducibility)")
    _add_mssc_flags(p_solve)
    _add_param_flags(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_check = sub.add_parser("check", help="d-stationarity test at a point")
    p_check.add_argument("--problem", choices=["example2d", "mssc"], required=True)
    p_check.add_argument("--point", required=True, help="comma-separated coordinates (e.g. --point=-1,-1)")
    p_check.add_argument("--pss", choices=["d1", "d2", "d3"], default="d1")
    p_check.add_argument("--tol", type=float, default=1e-6)
    p_check.add_argument("--fd-step", dest="fd_step", type=float, default=1e-7)
    p_check.add_argument("--sign-at-zero", dest="sign_at_zero", type=float, default=1.0)
    p_check.add_argument("--json", default=None, help="report path (default: stdout)")
    _add_mssc_flags(p_check)
    p_check.set_defaults(func=cmd_check)

    p_t1 = sub.add_parser("table1", help="basin counts on the 2-D test problem")
    p_t1.add_argument("--starts", type=int, required=True)
    p_t1.add_argument("--seed", type=int, default=None)
    p_t1.add_argument("--pss", choices=["d1", "d2", "d3"], default="d1")
    p_t1.add_argument("--csv", default="table1_counts.csv")
    p_t1.add_argument("--json", default="table1_report.json")
    p_t1.add_argument("--workers", type=int, default=1)
    p_t1.add_argument("--timings", action="store_true")
    _add_param_flags(p_t1)
    p_t1.set_defaults(func=cmd_table1)

    p_cl = sub.add_parser("cluster", help="paired DCA vs escape-step comparison on clustering data")
    p_cl.add_argument("--starts", type=int, default=50)
    p_cl.add_argument("--seed", type=int, default=None)
    p_cl.add_argument("--pss", choices=["d1", "d2", "d3"], default="d1")
    p_cl.add_argument("--csv", default="cluster_pairs.csv")
    p_cl.add_argument("--json", default="cluster_summary.json")
    p_cl.add_argument("--workers", type=int, default=1)
    p_cl.add_argument("--timings", action="store_true")
    _add_mssc_flags(p_cl)
    _add_param_flags(p_cl)
    p_cl.set_defaults(func=cmd_cluster)

    p_gen = sub.add_parser("gen", help="write synthetic blob data as CSV")
    p_gen.add_argument("--blobs", required=True, help="spec 'NxP' (N blobs, P points each)")
    p_gen.add_argument("--spread", type=float, default=1.0)
    p_gen.add_argument("--box", default="-10,-10,10,10")
    p_gen.add_argument("--seed", type=int, default=None)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=cmd_gen)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else _EXIT_USAGE
    logging.basicConfig(
        level=logging.DEBUG if args.verbose > 1 else (logging.INFO if args.verbose else logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ProblemDefinitionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_FAILURE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_USAGE


def entry() -> None:
    sys.exit(main())
