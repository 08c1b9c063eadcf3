"""Command-line interface: ``uslice compare | barycenter | docclass``.

Exit codes: 0 success, 2 bad usage or input, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .barycenter import BarycenterProblem, barycenter, regular_grid
from .divergences import DivergenceSpec, Kind, SolverError, UnbalancedParams
from .docclass import MODES, classify, thread_count
from .io import (RASTER_MAGIC, FormatError, read_point_cloud, read_raster, write_matrix,
                 write_point_cloud, write_raster, write_trace)
from .measures import DiscreteMeasure, MeasureError
from .ot1d import sliced_ot_loss
from .slicing import sample_directions
from .suot import suot, suot_marginals
from .usot import usot, usot_marginals, usot_stochastic

EXIT_OK, EXIT_USAGE, EXIT_SOLVER = 0, 2, 3


class UsageError(Exception):
    pass


def _solver_flags(p: argparse.ArgumentParser, fw_default: int):
    g = p.add_argument_group("solver")
    g.add_argument("--p", type=float, default=2.0, help="cost exponent, C(x,y)=|x-y|^p (default 2)")
    g.add_argument("--rho1", type=float, default=1.0,
                   help="KL strength on the first measure's marginal (default 1)")
    g.add_argument("--rho2", type=float, default=1.0,
                   help="KL strength on the second measure's marginal (default 1)")
    g.add_argument("--divergence", choices=[k.value for k in Kind], default="kl",
                   help="marginal penalty; Frank-Wolfe modes need kl (default kl)")
    g.add_argument("--projections", type=int, default=500, metavar="K",
                   help="number of random directions (default 500)")
    g.add_argument("--fw-iters", type=int, default=fw_default, metavar="F",
                   help=f"Frank-Wolfe iterations (default {fw_default})")
    g.add_argument("--fw-tol", type=float, default=None,
                   help="stop early once the dual value increases by less than this")
    g.add_argument("--seed", type=int, default=0, help="seed for the random directions (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uslice", description="Sliced and unbalanced optimal transport between point clouds.")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compare", help="transport value between two point clouds",
                       description="Print a JSON object with the transport value between two "
                                   "point-cloud CSV files (header x1,...,xd,w).")
    c.add_argument("alpha", help="first point cloud (CSV)")
    c.add_argument("beta", help="second point cloud (CSV)")
    c.add_argument("--mode", choices=MODES, default="usot", help="quantity to compute (default usot)")
    c.add_argument("--marginals", metavar="OUT.csv",
                   help="write the relaxed marginal of alpha to OUT.csv and that of beta to "
                        "OUT_beta.csv (suot: averaged over slices)")
    c.add_argument("--trace", metavar="OUT.csv", help="write the dual value per iteration (iter,dual_value)")
    _solver_flags(c, 20)

    b = sub.add_parser("barycenter", help="USOT barycenter on a fixed grid",
                       description="Compute a weighted USOT barycenter supported on a grid. "
                                   "Inputs are point-cloud CSVs or USOTGRID rasters.")
    b.add_argument("inputs", nargs="+", help="input measures (CSV or raster)")
    b.add_argument("--weights", help="comma-separated barycentric weights summing to 1 "
                                     "(default uniform)")
    b.add_argument("--grid", metavar="ROWSxCOLS", help="regular grid on the unit square")
    b.add_argument("--template", metavar="RASTER", help="take the grid shape from this raster")
    b.add_argument("--lr", type=float, default=1.0, help="mirror-descent learning rate (default 1)")
    b.add_argument("--iters", type=int, default=500, help="outer iterations (default 500)")
    b.add_argument("--out", required=True,
                   help="output path; .csv writes a point cloud, anything else a raster")
    b.add_argument("--trace", metavar="OUT.csv", help="write the objective per iteration (iter,objective)")
    _solver_flags(b, 20)

    d = sub.add_parser("docclass", help="k-NN document classification with transport distances",
                       description="Compute all pairwise distances between documents and "
                                   "classify the test split with k nearest neighbours.")
    d.add_argument("docs", help="directory holding one <doc_id>.csv point cloud per document")
    d.add_argument("labels", help="CSV with columns doc_id,label,split (split: train or test)")
    d.add_argument("--mode", choices=MODES, default="usot", help="distance to use (default usot)")
    d.add_argument("--knn", type=int, default=1, metavar="k", help="number of neighbours (default 1)")
    d.add_argument("--matrix", metavar="OUT.csv", help="write the full distance matrix")
    d.add_argument("--report", metavar="OUT.json", help="also write the report JSON to a file")
    d.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: USLICE_THREADS or the CPU count)")
    _solver_flags(d, 10)
    return parser


def _params(args) -> UnbalancedParams:
    try:
        kind = Kind(args.divergence)
        return UnbalancedParams(DivergenceSpec(kind, args.rho1), DivergenceSpec(kind, args.rho2),
                                p=args.p, n_projections=args.projections, fw_iters=args.fw_iters,
                                seed=args.seed, fw_tol=args.fw_tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _dump(obj) -> str:
    return json.dumps(obj, allow_nan=True)


def _beta_path(path: Path) -> Path:
    return path.with_name(f"{path.stem}_beta{path.suffix}")


def cmd_compare(args) -> int:
    params = _params(args)
    alpha = read_point_cloud(args.alpha)
    beta = read_point_cloud(args.beta)
    if alpha.dim != beta.dim:
        raise UsageError(f"alpha is in R^{alpha.dim} but beta in R^{beta.dim}")
    mode = args.mode
    trace: list = []
    iterations = 0
    marg = None
    if mode == "sot":
        dirs = sample_directions(alpha.dim, params.n_projections, params.seed)
        value = sliced_ot_loss(alpha, beta, dirs, params.p)
        marg = (alpha.weights, beta.weights)
    elif mode == "suot":
        dirs = sample_directions(alpha.dim, params.n_projections, params.seed)
        value, state = suot(alpha, beta, dirs, params)
        if args.marginals:
            pairs = suot_marginals(state, alpha, beta, dirs, params)
            marg = (np.mean([m[0].weights for m in pairs], axis=0),
                    np.mean([m[1].weights for m in pairs], axis=0))
    elif mode == "usot":
        value, state = usot(alpha, beta, None, params)
    else:
        value, state = usot_stochastic(alpha, beta, params)
    if mode != "sot":
        trace, iterations = state.trace, state.iteration
        if mode != "suot" and args.marginals:
            pa, pb = usot_marginals(state, alpha, beta, params)
            marg = (pa.weights, pb.weights)
    if args.marginals:
        out = Path(args.marginals)
        write_point_cloud(out, alpha.points, marg[0])
        write_point_cloud(_beta_path(out), beta.points, marg[1])
    if args.trace:
        write_trace(args.trace, trace)
    print(_dump({"mode": mode, "value": value, "mass_alpha": alpha.mass(),
                 "mass_beta": beta.mass(), "iterations": iterations, "seed": params.seed}))
    return EXIT_OK


def _is_raster(path) -> bool:
    with open(path, "rb") as fh:
        return fh.read(len(RASTER_MAGIC)) == RASTER_MAGIC


def _read_measure(path):
    try:
        if _is_raster(path):
            r = read_raster(path)
            return DiscreteMeasure(regular_grid(*r.shape), r.ravel()), r.shape
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc
    return read_point_cloud(path), None


def _parse_grid(text: str):
    try:
        rows, cols = (int(v) for v in text.lower().split("x"))
    except ValueError as exc:
        raise UsageError(f"--grid expects ROWSxCOLS, got {text!r}") from exc
    if rows < 1 or cols < 1:
        raise UsageError("--grid sizes must be positive")
    return rows, cols


def cmd_barycenter(args) -> int:
    params = _params(args)
    loaded = [_read_measure(p) for p in args.inputs]
    if args.grid:
        shape = _parse_grid(args.grid)
    elif args.template:
        shape = read_raster(args.template).shape
    else:
        shapes = [s for _, s in loaded if s is not None]
        if not shapes:
            raise UsageError("give --grid or --template when no input is a raster")
        shape = shapes[0]
    if args.weights is None:
        omegas = np.full(len(loaded), 1.0 / len(loaded))
    else:
        try:
            omegas = np.array([float(v) for v in args.weights.split(",")])
        except ValueError as exc:
            raise UsageError(f"bad --weights: {args.weights!r}") from exc
    grid = regular_grid(*shape)
    try:
        problem = BarycenterProblem([m for m, _ in loaded], omegas, grid, params,
                                    lr=args.lr, iters=args.iters)
    except (ValueError, MeasureError) as exc:
        raise UsageError(str(exc)) from exc
    objective: list = []
    result = barycenter(problem, callback=lambda t, b, bt, bh, obj: objective.append(obj))
    out = Path(args.out)
    if out.suffix.lower() == ".csv":
        write_point_cloud(out, grid, result.weights)
    else:
        write_raster(out, result.weights.reshape(shape))
    if args.trace:
        write_trace(args.trace, objective, header=("iter", "objective"))
    return EXIT_OK


def cmd_docclass(args) -> int:
    params = _params(args)
    if args.knn < 1:
        raise UsageError("--knn must be >= 1")
    workers = args.threads or thread_count()
    res = classify(args.docs, args.labels, args.mode, params, k=args.knn, workers=workers)
    if args.matrix:
        write_matrix(args.matrix, res.matrix, res.doc_ids)
    text = _dump(res.report())
    if args.report:
        Path(args.report).write_text(text + "\n", encoding="utf-8")
    print(text)
    return EXIT_OK


COMMANDS = {"compare": cmd_compare, "barycenter": cmd_barycenter, "docclass": cmd_docclass}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except SolverError as exc:
        print(f"uslice: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (UsageError, FormatError, MeasureError, ValueError) as exc:
        print(f"uslice: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"uslice: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
