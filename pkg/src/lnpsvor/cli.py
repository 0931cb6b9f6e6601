"""Command-line interface: ``lnpsvor {featurize,train,predict,cv,bench} ...``.

Flags follow the usual linear-SVM toolkit letters: ``-s`` solver, ``-c`` cost
(sets C1 = C2), ``-c2`` second cost, ``-p`` epsilon, ``-t`` stopping
tolerance, ``-v`` folds, ``-B`` bias (negative disables it), ``-r`` predictor.
Settings resolve as flags > ``--config`` JSON file > defaults, and the
effective configuration is logged to standard error.

Exit codes: 0 success, 1 usage, 2 I/O or file format, 3 numeric/validation.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import bench, modelio, text
from .evaluation import SOLVERS, evaluate, get_trainer, grid_search, cross_validate
from .modelio import ModelFormatError
from .npsvor import SolverConfig
from .sparse import DataFormatError, align_features, load_libsvm, parse_libsvm_lines, write_libsvm

log = logging.getLogger("lnpsvor")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_VALUE = 0, 1, 2, 3

DEFAULTS = {
    "solver": "npsvor-dcd2",
    "C1": 1.0,
    "C2": None,
    "eps": 0.1,
    "eps_stop": None,       # 0.01 for svr, 0.1 otherwise
    "bias": 1.0,
    "predictor": "new",
    "seed": 0,
    "jobs": 1,
    "folds": 5,
    "grid": None,
    "shrinking": True,
    "max_sweeps": 1000,
    "test_fraction": 0.3,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _solver_flags(p: argparse.ArgumentParser):
    p.add_argument("-s", dest="solver", choices=SOLVERS, help="solver (default npsvor-dcd2)")
    p.add_argument("-c", dest="C1", type=float, help="cost; sets C1 = C2 (default 1)")
    p.add_argument("-c2", dest="C2", type=float, help="override C2 (NPSVOR hinge cost)")
    p.add_argument("-p", dest="eps", type=float, help="epsilon-insensitive width (default 0.1)")
    p.add_argument("-t", dest="eps_stop", type=float,
                   help="relative stopping tolerance (default 0.1; 0.01 for svr)")
    p.add_argument("-B", dest="bias", type=float, help="bias feature value; < 0 disables (default 1)")
    p.add_argument("--max-sweeps", dest="max_sweeps", type=int)
    p.add_argument("--no-shrinking", dest="shrinking", action="store_const", const=False)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, help="threads for ranks or grid cells (default 1)")
    p.add_argument("--config", type=Path, help="JSON file with default settings")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="lnpsvor", description="Linear nonparallel SVM ordinal regression.")
    ap.add_argument("--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser, required=True)

    f = sub.add_parser("featurize", help="text corpus -> TF-IDF LIBSVM file")
    f.add_argument("corpus", type=Path, help="label<TAB>text file, or a scale-dataset directory")
    f.add_argument("output", type=Path)
    f.add_argument("--vocab", type=Path, help="reuse this vocabulary instead of building one")
    f.add_argument("--vocab-out", type=Path, help="where to write the built vocabulary")
    f.add_argument("--stem", action="store_true", help="Porter stemming (needs nltk)")
    f.add_argument("--keep-stopwords", action="store_true")
    f.add_argument("--no-bigrams", action="store_true")
    f.add_argument("--min-count", type=int, default=3)
    f.add_argument("--max-df", type=float, default=0.5)

    t = sub.add_parser("train", help="fit a model on a LIBSVM file")
    _solver_flags(t)
    t.add_argument("-r", dest="predictor", choices=("old", "new"))
    t.add_argument("data", type=Path)
    t.add_argument("model", type=Path)

    pr = sub.add_parser("predict", help="predict a LIBSVM file with a saved model")
    pr.add_argument("-r", dest="predictor", choices=("old", "new"))
    pr.add_argument("--report", type=Path, help="also write the evaluation report as JSON")
    pr.add_argument("model", type=Path)
    pr.add_argument("data", type=Path)
    pr.add_argument("output", type=Path)

    cv = sub.add_parser("cv", help="k-fold cross-validation, optionally over a C grid")
    _solver_flags(cv)
    cv.add_argument("-r", dest="predictor", choices=("old", "new"))
    cv.add_argument("-v", dest="folds", type=int, help="folds (default 5)")
    cv.add_argument("-g", dest="grid", help="log2 C grid lo:step:hi, C1 = C2")
    cv.add_argument("--full-grid", action="store_true", help="independent C1 and C2 over the grid")
    cv.add_argument("--out", type=Path, help="write one JSON record per grid cell")
    cv.add_argument("data", type=Path)

    b = sub.add_parser("bench", help="benchmark drivers")
    bsub = b.add_subparsers(dest="bench", parser_class=_Parser, required=True)

    bc = bsub.add_parser("convergence", help="relative dual gap vs CPU time, DCD-1 and DCD-2")
    _solver_flags(bc)
    bc.add_argument("--data", type=Path, help="LIBSVM file (default: versioned sparse synthetic)")
    bc.add_argument("-k", dest="rank", type=int, default=3)
    bc.add_argument("--ref-tol", type=float, default=1e-10)
    bc.add_argument("--trace-dir", type=Path, help="write '<solver>.trace' two-column files here")
    bc.add_argument("--out", type=Path)

    be = bsub.add_parser("epsilon", help="MAE/MSE/time/nSVs ratios against epsilon = 0")
    _solver_flags(be)
    be.add_argument("--data", type=Path, help="LIBSVM file split by --test-fraction (default: synthetic)")
    be.add_argument("--test", type=Path, help="separate test file")
    be.add_argument("--test-fraction", type=float)
    be.add_argument("--eps-grid", default="0,0.1,0.2,0.3,0.4,0.5")
    be.add_argument("--out", type=Path)

    bp = bsub.add_parser("predictors", help="r_old vs r_new on one trained model")
    _solver_flags(bp)
    bp.add_argument("--data", type=Path, help="LIBSVM file (default: fan-shaped 2-D synthetic)")
    bp.add_argument("--test", type=Path)
    bp.add_argument("--test-fraction", type=float)
    bp.add_argument("--out", type=Path)

    bm = bsub.add_parser("methods", help="grid-search, retrain and test several solvers")
    _solver_flags(bm)
    bm.add_argument("datasets", nargs="+", help="name=train.svm:test.svm, or name=data.svm (split)")
    bm.add_argument("--solvers", default="svc,svr,redsvm,npsvor-dcd2")
    bm.add_argument("-v", dest="folds", type=int)
    bm.add_argument("-g", dest="grid", help="log2 C grid lo:step:hi (default -5:1:5)")
    bm.add_argument("--test-fraction", type=float)
    bm.add_argument("--out", type=Path)
    return ap


def parse_grid(spec: str):
    try:
        lo, step, hi = (int(v) for v in spec.split(":"))
    except ValueError:
        raise UsageError(f"grid must be lo:step:hi with integers, got {spec!r}") from None
    if step <= 0 or hi < lo:
        raise UsageError(f"empty grid {spec!r}")
    return lo, step, hi


def resolve(args: argparse.Namespace) -> dict:
    """Merge flags over the config file over the defaults."""
    cfg = dict(DEFAULTS)
    path = getattr(args, "config", None)
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            loaded = json.load(fh)
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"{path}: unknown config keys {sorted(unknown)}")
        cfg.update(loaded)
    flags = {k: v for k, v in vars(args).items() if k in DEFAULTS and v is not None}
    if "C1" in flags and "C2" not in flags:
        cfg["C2"] = None  # -c ties C2 unless -c2 is also given
    cfg.update(flags)
    if cfg["eps_stop"] is None:
        cfg["eps_stop"] = 0.01 if cfg["solver"] == "svr" else 0.1
    if cfg["bias"] is not None and cfg["bias"] < 0:
        cfg["bias"] = None
    if cfg["bias"] == 0:
        raise ValueError("bias must be positive, or negative to disable it")
    if cfg["jobs"] < 1:
        raise ValueError("--jobs must be at least 1")
    if cfg["grid"] is not None:
        parse_grid(cfg["grid"])
    return cfg


def solver_config(cfg: dict) -> SolverConfig:
    return SolverConfig(C1=cfg["C1"], C2=cfg["C2"], eps=cfg["eps"], eps_stop=cfg["eps_stop"],
                        shrinking=cfg["shrinking"], max_sweeps=cfg["max_sweeps"], seed=cfg["seed"])


def _write_lines(path, lines):
    with open(path, "w", encoding="utf-8") as fh:
        fh.writelines(f"{x}\n" for x in lines)


def _emit_records(records, out, columns=None):
    print(bench.render_table(records, columns))
    if out is not None:
        bench.write_jsonl(records, out)


# -- commands ---------------------------------------------------------------

def cmd_featurize(args, cfg):
    if args.corpus.is_dir():
        labels, docs = text.load_scale_corpus(args.corpus)
    else:
        labels, docs = text.read_corpus(args.corpus)
    if args.vocab:
        vocab = text.Vocabulary.load(args.vocab)
    else:
        opts = text.TextOptions(stem=args.stem, stopwords=not args.keep_stopwords,
                                min_count=args.min_count, max_df=args.max_df,
                                bigrams=not args.no_bigrams)
        vocab = text.build_vocab(docs, opts)
        vocab.save(args.vocab_out or args.output.with_name(args.output.name + ".vocab"))
    data = text.featurize(docs, labels, vocab)
    write_libsvm(data, args.output)
    log.info("featurized %d documents over %d terms", data.n, len(vocab))


def cmd_train(args, cfg):
    data = load_libsvm(args.data, bias=cfg["bias"])
    model = get_trainer(cfg["solver"], cfg["predictor"])(data, solver_config(cfg))
    if cfg["solver"].startswith("npsvor") and not all(model.converged):
        log.warning("ranks %s hit max_sweeps", [k + 1 for k, ok in enumerate(model.converged) if not ok])
    modelio.save_model(model, args.model)
    log.info("trained %s on %d instances, %d ranks", cfg["solver"], data.n, data.p)


def _read_unchecked(path):
    with open(path, encoding="utf-8") as fh:
        raw, indptr, indices, values = parse_libsvm_lines(fh)
    if not raw:
        raise DataFormatError(f"{path}: no instances")
    m = max(indices) + 1 if indices else 0
    X = sp.csr_matrix((np.array(values, dtype=float), np.array(indices, dtype=np.int64),
                       np.array(indptr, dtype=np.int64)), shape=(len(raw), m))
    return np.array(raw), X


def cmd_predict(args, cfg):
    model = modelio.load_model(args.model)
    raw, X = _read_unchecked(args.data)
    X = align_features(X, model.n_raw_features, model.bias)
    if args.predictor and hasattr(model, "predictor"):
        ranks = model.predict(X, predictor=args.predictor)
    else:
        ranks = model.predict(X)
    labels = np.asarray(model.labels)
    _write_lines(args.output, labels[ranks - 1].tolist())
    known = np.isin(raw, labels)
    if not known.all():
        log.warning("%d test labels are not in the model's label set; skipping evaluation",
                    int((~known).sum()))
        return
    report = evaluate(np.searchsorted(labels, raw) + 1, ranks, model.p)
    print(report.to_text())
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(report.to_record(), fh, sort_keys=True)
            fh.write("\n")


def _grid_cells(cfg, full):
    lo, step, hi = parse_grid(cfg["grid"])
    exps = range(lo, hi + 1, step)
    if full:
        return [(2.0 ** a, 2.0 ** b) for a in exps for b in exps]
    return [(2.0 ** e, 2.0 ** e) for e in exps]


def cmd_cv(args, cfg):
    data = load_libsvm(args.data, bias=cfg["bias"])
    sc = solver_config(cfg)
    if cfg["grid"] is None:
        res = cross_validate(data, cfg["solver"], sc, cfg["folds"], cfg["seed"], cfg["predictor"])
        rec = [{"C1": sc.C1, "C2": sc.C2, "mae": res.mae_mean, "mae_std": res.mae_std,
                "mse": res.mse_mean, "mse_std": res.mse_std}]
        _emit_records(rec, args.out)
        return
    gs = grid_search(data, cfg["solver"], _grid_cells(cfg, args.full_grid), sc, cfg["folds"],
                     cfg["seed"], cfg["predictor"], n_jobs=cfg["jobs"])
    _emit_records(gs.to_records(), args.out)
    c1, c2 = gs.best
    log.info("best C1=%g C2=%g (cv mae %.6f)", c1, c2, gs.cells[(c1, c2)].mae_mean)


def _train_test(args, cfg, default):
    from .sparse import stratified_split
    if args.data is None:
        data = default()
    else:
        data = load_libsvm(args.data, bias=cfg["bias"])
    if getattr(args, "test", None) is not None:
        test = load_libsvm(args.test, bias=data.bias, label_map=data.labels,
                           n_features=data.n_raw_features)
        return data, test
    return stratified_split(data, cfg["test_fraction"], cfg["seed"])


def cmd_bench(args, cfg):
    from . import synthetic
    sc = solver_config(cfg)
    if args.bench == "convergence":
        data = load_libsvm(args.data, bias=cfg["bias"]) if args.data else synthetic.sparse_ordinal()
        res = bench.bench_convergence(data, sc, k=args.rank, ref_tol=args.ref_tol)
        if not res.reference_converged:
            log.warning("reference run did not converge; gaps use the best objective seen")
        if args.trace_dir:
            args.trace_dir.mkdir(parents=True, exist_ok=True)
            for name, tr in res.traces.items():
                (args.trace_dir / f"{name}.trace").write_text(tr.to_text(), encoding="utf-8")
        _emit_records(res.to_records(), args.out)
    elif args.bench == "epsilon":
        train, test = _train_test(args, cfg, synthetic.sparse_ordinal)
        grid = [float(v) for v in args.eps_grid.split(",")]
        _emit_records(bench.bench_epsilon(train, test, grid, sc), args.out)
    elif args.bench == "predictors":
        train, test = _train_test(args, cfg, synthetic.fan_clusters)
        _emit_records([bench.bench_predictors(train, test, sc)], args.out)
    elif args.bench == "methods":
        from .sparse import stratified_split
        datasets = {}
        for spec in args.datasets:
            name, _, paths = spec.partition("=")
            if not paths:
                raise UsageError(f"dataset spec must be name=train[:test], got {spec!r}")
            tr_path, _, te_path = paths.partition(":")
            train = load_libsvm(tr_path, bias=cfg["bias"])
            if te_path:
                test = load_libsvm(te_path, bias=train.bias, label_map=train.labels,
                                   n_features=train.n_raw_features)
            else:
                train, test = stratified_split(train, cfg["test_fraction"], cfg["seed"])
            datasets[name] = (train, test)
        solvers = [s.strip() for s in args.solvers.split(",")]
        for s in solvers:
            if s not in SOLVERS:
                raise UsageError(f"unknown solver {s!r}")
        lo, step, hi = parse_grid(cfg["grid"] or "-5:1:5")
        grid = [(2.0 ** e, 2.0 ** e) for e in range(lo, hi + 1, step)]
        recs = bench.bench_methods(datasets, solvers, grid, sc, cfg["folds"], cfg["seed"],
                                   n_jobs=cfg["jobs"])
        _emit_records(recs, args.out)


COMMANDS = {"featurize": cmd_featurize, "train": cmd_train, "predict": cmd_predict,
            "cv": cmd_cv, "bench": cmd_bench}


def _glue_grid(argv):
    # "-g -5:1:5" would otherwise be read as an unknown option
    out, it = [], iter(argv)
    for tok in it:
        if tok == "-g":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"-g{nxt}")
        else:
            out.append(tok)
    return out


def run(argv=None) -> int:
    argv = _glue_grid(sys.argv[1:] if argv is None else list(argv))
    logging.basicConfig(stream=sys.stderr, format="lnpsvor: %(message)s", level=logging.INFO, force=True)
    try:
        args = build_parser().parse_args(argv)
        if args.verbose:
            log.setLevel(logging.DEBUG)
        cfg = resolve(args)
        if args.command not in ("featurize", "predict"):
            solver_config(cfg)  # validate before any work
            log.info("config %s", json.dumps(cfg, sort_keys=True))
        COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"lnpsvor: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, DataFormatError, ModelFormatError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        print(f"lnpsvor: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, FloatingPointError, ArithmeticError) as exc:
        print(f"lnpsvor: error: {exc}", file=sys.stderr)
        return EXIT_VALUE
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
