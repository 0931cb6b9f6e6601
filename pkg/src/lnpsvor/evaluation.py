"""Ordinal error metrics, stratified cross-validation and grid search over C."""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import baselines, npsvor
from .npsvor import SolverConfig
from .sparse import SparseDataset


@dataclass
class EvalReport:
    mae: float
    mse: float
    accuracy: float
    confusion: np.ndarray  # rows: true rank, columns: predicted rank

    @property
    def p(self) -> int:
        return self.confusion.shape[0]

    @property
    def n(self) -> int:
        return int(self.confusion.sum())

    @property
    def per_rank_accuracy(self) -> np.ndarray:
        totals = self.confusion.sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.diag(self.confusion) / totals

    def to_record(self) -> dict:
        return {"mae": self.mae, "mse": self.mse, "accuracy": self.accuracy,
                "confusion": self.confusion.tolist()}

    def to_text(self) -> str:
        p = self.p
        lines = [f"MAE {self.mae:.4f}  MSE {self.mse:.4f}  accuracy {self.accuracy:.4f}",
                 "true\\pred " + " ".join(f"{j:>7d}" for j in range(1, p + 1))]
        for i in range(p):
            lines.append(f"{i + 1:>9d} " + " ".join(f"{c:>7d}" for c in self.confusion[i]))
        return "\n".join(lines)


def evaluate(true_labels, predicted_labels, p: int) -> EvalReport:
    y = np.asarray(true_labels, dtype=np.int64)
    yhat = np.asarray(predicted_labels, dtype=np.int64)
    if y.shape != yhat.shape or y.ndim != 1:
        raise ValueError("label sequences must be 1-d and of equal length")
    if y.size == 0:
        raise ValueError("nothing to evaluate")
    if y.min() < 1 or y.max() > p or yhat.min() < 1 or yhat.max() > p:
        raise ValueError(f"labels must lie in 1..{p}")
    err = (yhat - y).astype(float)
    conf = np.zeros((p, p), dtype=np.int64)
    np.add.at(conf, (y - 1, yhat - 1), 1)
    return EvalReport(float(np.mean(np.abs(err))), float(np.mean(err ** 2)),
                      float(np.mean(err == 0)), conf)


SOLVERS = ("npsvor-dcd2", "npsvor-dcd1", "svc", "svr", "redsvm")


def get_trainer(solver, predictor: str = "new"):
    """Map a solver name to ``train(data, cfg) -> model``; callables pass through."""
    if callable(solver):
        return solver
    if solver in ("npsvor-dcd2", "npsvor-dcd1"):
        algo = solver.split("-")[1]
        return lambda data, cfg: npsvor.train(data, cfg.replace(algorithm=algo), predictor=predictor)
    table = {"svc": baselines.train_svc_ova, "svr": baselines.train_svr,
             "redsvm": baselines.train_redsvm}
    try:
        return table[solver]
    except KeyError:
        raise ValueError(f"unknown solver {solver!r}; choose from {SOLVERS}") from None


def stratified_folds(y, folds: int, seed: int) -> np.ndarray:
    """Fold id per instance: seeded shuffle within each rank, then round-robin."""
    y = np.asarray(y)
    if folds < 2:
        raise ValueError("need at least 2 folds")
    rng = np.random.default_rng(seed)
    fold = np.empty(y.shape[0], dtype=np.int64)
    for r in np.unique(y):
        idx = np.flatnonzero(y == r)
        if idx.size < folds:
            raise ValueError(f"rank {r} has {idx.size} instances, fewer than {folds} folds")
        fold[rng.permutation(idx)] = np.arange(idx.size) % folds
    return fold


@dataclass
class CVResult:
    mae_mean: float
    mae_std: float
    mse_mean: float
    mse_std: float
    fold_mae: list = field(default_factory=list)
    fold_mse: list = field(default_factory=list)


def cross_validate(data: SparseDataset, solver, cfg: SolverConfig = SolverConfig(),
                   folds: int = 5, seed: int = 0, predictor: str = "new") -> CVResult:
    trainer = get_trainer(solver, predictor)
    assign = stratified_folds(data.y, folds, seed)
    maes, mses = [], []
    for f in range(folds):
        tr = data.subset(np.flatnonzero(assign != f), check_ranks=True)
        va = data.subset(np.flatnonzero(assign == f))
        model = trainer(tr, cfg)
        rep = evaluate(va.y, model.predict(va), data.p)
        maes.append(rep.mae)
        mses.append(rep.mse)
    return CVResult(float(np.mean(maes)), float(np.std(maes)), float(np.mean(mses)),
                    float(np.std(mses)), maes, mses)


def tied_grid(lo: int = -5, hi: int = 5, step: int = 1):
    """``C1 = C2 = 2^e`` for ``e`` in ``lo..hi``."""
    return [(2.0 ** e, 2.0 ** e) for e in range(lo, hi + 1, step)]


def full_grid(lo: int = -8, hi: int = 5, step: int = 1):
    exps = range(lo, hi + 1, step)
    return [(2.0 ** a, 2.0 ** b) for a, b in itertools.product(exps, exps)]


@dataclass
class GridResult:
    cells: dict  # (C1, C2) -> CVResult

    @property
    def best(self):
        return min(self.cells, key=lambda c: (self.cells[c].mae_mean, c[0], c[1]))

    def to_records(self):
        best = self.best
        return [{"C1": c1, "C2": c2, "mae": r.mae_mean, "mae_std": r.mae_std,
                 "mse": r.mse_mean, "mse_std": r.mse_std, "best": (c1, c2) == best}
                for (c1, c2), r in sorted(self.cells.items())]


def grid_search(data: SparseDataset, solver, grid, cfg: SolverConfig = SolverConfig(),
                folds: int = 5, seed: int = 0, predictor: str = "new", n_jobs: int = 1) -> GridResult:
    grid = list(grid)
    if not grid:
        raise ValueError("empty grid")

    def run(cell):
        c1, c2 = cell
        return cell, cross_validate(data, solver, cfg.replace(C1=c1, C2=c2), folds, seed, predictor)

    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            results = list(pool.map(run, grid))
    else:
        results = [run(c) for c in grid]
    return GridResult(dict(results))
