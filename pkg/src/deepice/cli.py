"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 degeneracy, 4 budget or memory refusal.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .core import MAXOUT, RELU, BudgetExceededError, Dataset, DegenerateError, DeepIceError, NoConfigError
from .coreset import CoresetError, FilterParams
from .cv import FoldError, cv_run
from .geometry import EPS
from .io import DEFAULT_SIGMA, InputError, gen_data, ingest, map_labels, read_table, save_dataset, write_csv
from .model import Model, ModelFormatError, decision_grid, fit
from .oracle import enumerate_solutions, oracle_search

EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE, EXIT_BUDGET = 0, 2, 3, 4


def _emit(line: str) -> None:
    sys.stdout.write(line + "\n")
    sys.stdout.flush()


def _data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("data", help="CSV file with a header row")
    p.add_argument("--label-column", default="-1", help="label column name or index (default: last)")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--sigma", type=float, default=DEFAULT_SIGMA, help="std of the Gaussian jitter")
    p.add_argument("--seed", type=int, default=0)


def _model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, default=1, help="number of hidden units")
    p.add_argument("--activation", choices=[MAXOUT, RELU], default=MAXOUT)
    p.add_argument("--eps", type=float, default=EPS, help="on-plane tolerance for signed distances")


def _search_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--memory-cap", type=int, default=None, help="prediction cache budget in bytes")
    p.add_argument("--progress", action="store_true", help="stream best-so-far as JSON lines")


def _coreset_args(p: argparse.ArgumentParser) -> None:
    d = FilterParams()
    p.add_argument("--block-size", type=int, default=d.block_size)
    p.add_argument("--rounds", type=int, default=d.rounds)
    p.add_argument("--heap", type=int, default=d.heap_size)
    p.add_argument("--bmax", type=int, default=d.bmax)
    p.add_argument("--shrink", type=float, default=d.shrink)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="deepice", description="Exact 0-1 loss training of two-layer networks.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("fit-exact", help="globally optimal fit on the whole dataset")
    _data_args(p), _model_args(p), _search_args(p)
    p.add_argument("--out", help="write the model as JSON")
    p.add_argument("--grid", help="write a decision grid CSV (D=2 only)")

    p = sub.add_parser("fit-coreset", help="coreset filtering followed by an exact fit")
    _data_args(p), _model_args(p), _search_args(p), _coreset_args(p)
    p.add_argument("--out")
    p.add_argument("--grid")

    p = sub.add_parser("predict", help="label points with a saved model")
    p.add_argument("model")
    p.add_argument("data", help="CSV of features, optionally with a label column")
    p.add_argument("--label-column", default=None, help="label column, if present, to report the loss")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--out", help="write predictions CSV (default: stdout)")

    p = sub.add_parser("cv", help="k-fold cross-validation report")
    _data_args(p), _model_args(p), _search_args(p), _coreset_args(p)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--coreset", action="store_true", help="fit each fold with coreset filtering")
    p.add_argument("--log", help="append per-fold JSON lines here (default: stderr)")

    p = sub.add_parser("enum-solutions", help="all configurations below a loss threshold (small data)")
    _data_args(p), _model_args(p)
    p.add_argument("--threshold", type=int, required=True, help="report losses strictly below this")
    p.add_argument("--cap", type=int, default=10**7, help="candidate budget")

    p = sub.add_parser("gen-data", help="synthetic points in general position")
    p.add_argument("out")
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--kind", choices=["blobs", "linear", "wedge"], default="blobs")
    p.add_argument("--flip", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)

    # debugging aid: brute-force ground truth
    p = sub.add_parser("oracle")
    _data_args(p), _model_args(p)
    p.add_argument("--cap", type=int, default=10**7)
    return ap


def _load(args, K: int) -> Dataset:
    ds = ingest(args.data, args.label_column, args.sigma, args.seed, delimiter=args.delimiter)
    if ds.n < ds.dim + K:
        raise InputError(f"{ds.n} usable rows, need at least D+K={ds.dim + K}")
    return ds


def _progress_cb(args):
    if not getattr(args, "progress", False):
        return None
    return lambda merges, best: _emit(json.dumps({"merges": merges, "best_loss": best}))


def _search_kwargs(args) -> dict:
    return {"threads": args.threads, "memory_cap": args.memory_cap, "progress": _progress_cb(args)}


def _params(args) -> FilterParams:
    return FilterParams(args.block_size, args.rounds, args.heap, args.bmax, args.shrink, args.seed)


def _finish_fit(args, model: Model, ds: Dataset) -> None:
    if args.out:
        model.save(args.out)
    if args.grid:
        lo, hi = ds.points.min(axis=0), ds.points.max(axis=0)
        pad = 0.05 * (hi - lo)
        grid = decision_grid(model, lo - pad, hi + pad)
        write_csv(args.grid, grid[:, :2], grid[:, 2].astype(int))
    _emit(json.dumps({"training_loss": model.training_loss, "n": ds.n, "K": model.K,
                      "activation": model.activation,
                      "neurons": [{"normal": n.normal, "sign": n.sign} for n in model.neurons]}))


def cmd_fit_exact(args) -> int:
    ds = _load(args, args.k)
    model = fit(ds, args.k, args.activation, method="exact", seed=args.seed, eps=args.eps, **_search_kwargs(args))
    _finish_fit(args, model, ds)
    return EXIT_OK


def cmd_fit_coreset(args) -> int:
    ds = _load(args, args.k)
    model = fit(ds, args.k, args.activation, method="coreset", params=_params(args), seed=args.seed,
                eps=args.eps, log_sink=_emit, **_search_kwargs(args))
    _finish_fit(args, model, ds)
    return EXIT_OK


def cmd_predict(args) -> int:
    try:
        model = Model.load(args.model)
    except (OSError, json.JSONDecodeError, ModelFormatError) as exc:
        raise InputError(f"cannot load model: {exc}") from exc
    X, raw, _ = read_table(args.data, args.label_column, args.delimiter, header=True)
    try:
        pred = model.predict(X)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if args.out:
        write_csv(args.out, X, pred)
    else:
        for v in pred:
            _emit(str(int(v)))
    if raw:
        loss = int(np.count_nonzero(pred != map_labels(raw)))
        sys.stderr.write(json.dumps({"loss": loss, "n": len(pred)}) + "\n")
    return EXIT_OK


def cmd_cv(args) -> int:
    ds = _load(args, args.k)
    if args.log:
        fh = open(args.log, "a")
        sink = lambda line: (fh.write(line + "\n"), fh.flush())  # noqa: E731
    else:
        fh = None
        sink = lambda line: sys.stderr.write(line + "\n")  # noqa: E731
    kw = {"eps": args.eps, "threads": args.threads, "memory_cap": args.memory_cap}
    if args.coreset:
        kw["params"] = _params(args)
    try:
        rep = cv_run(ds, args.k, args.activation, args.folds, args.seed,
                     method="coreset" if args.coreset else "exact", log_sink=sink, **kw)
    finally:
        if fh is not None:
            fh.close()
    _emit(json.dumps(rep.summary()))
    _emit(rep.table_cell())
    return EXIT_OK


def cmd_enum(args) -> int:
    ds = _load(args, args.k)
    sols = enumerate_solutions(ds, args.k, args.activation, args.threshold, cap=args.cap, eps=args.eps)
    for s in sols:
        _emit(json.dumps({"loss": s.loss, "ranks": s.config.ranks, "assignment": s.config.assignment,
                          "points": s.defining_points}))
    sys.stderr.write(json.dumps({"count": len(sols)}) + "\n")
    return EXIT_OK


def cmd_gen(args) -> int:
    ds = gen_data(args.n, args.dim, args.seed, kind=args.kind, flip=args.flip)
    save_dataset(ds, args.out)
    return EXIT_OK


def cmd_oracle(args) -> int:
    ds = _load(args, args.k)
    res = oracle_search(ds, args.k, args.activation, cap=args.cap, eps=args.eps)
    _emit(json.dumps({"loss": res.best.loss, "ranks": res.best.config.ranks,
                      "assignment": res.best.config.assignment, "candidates": res.candidates}))
    return EXIT_OK


COMMANDS = {
    "fit-exact": cmd_fit_exact,
    "fit-coreset": cmd_fit_coreset,
    "predict": cmd_predict,
    "cv": cmd_cv,
    "enum-solutions": cmd_enum,
    "gen-data": cmd_gen,
    "oracle": cmd_oracle,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except DegenerateError as exc:
        sys.stderr.write(f"degenerate input: {exc}\n")
        return EXIT_DEGENERATE
    except (BudgetExceededError, MemoryError) as exc:
        sys.stderr.write(f"refused: {exc}\n")
        return EXIT_BUDGET
    except (InputError, FoldError, NoConfigError, CoresetError, OSError) as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT
    except DeepIceError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
