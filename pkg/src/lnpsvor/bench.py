"""Desk-scale experiment drivers: solver convergence, epsilon sweeps, predictor
and method comparisons. Every driver returns plain dict records so results can
be written as JSON lines or rendered with :func:`render_table`.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import npsvor
from .evaluation import evaluate, get_trainer, grid_search
from .npsvor import SolverConfig


@dataclass
class ConvergenceTrace:
    solver: str
    times: list = field(default_factory=list)       # cumulative solver CPU seconds
    objective: list = field(default_factory=list)   # dual objective after each sweep
    rel_diff: np.ndarray = None

    def finalize(self, f_star: float):
        self.rel_diff = (np.asarray(self.objective) - f_star) / abs(f_star)

    @property
    def sweeps(self) -> int:
        return len(self.objective)

    def _first(self, target):
        hit = np.flatnonzero(self.rel_diff <= target)
        return int(hit[0]) if hit.size else None

    def time_to(self, target: float) -> float:
        i = self._first(target)
        return float("inf") if i is None else self.times[i]

    def sweeps_to(self, target: float) -> float:
        i = self._first(target)
        return float("inf") if i is None else i + 1

    def to_text(self) -> str:
        return "".join(f"{t:.6g} {r:.6e}\n" for t, r in zip(self.times, self.rel_diff))


@dataclass
class ConvergenceResult:
    k: int
    f_star: float
    reference_converged: bool
    traces: dict

    def to_records(self, targets=(1e-1, 1e-2, 1e-3)):
        out = []
        for name, tr in self.traces.items():
            rec = {"solver": name, "rank": self.k, "sweeps": tr.sweeps, "f_star": self.f_star}
            for t in targets:
                rec[f"time_to_{t:g}"] = tr.time_to(t)
                rec[f"sweeps_to_{t:g}"] = tr.sweeps_to(t)
            out.append(rec)
        return out


_RANK_SOLVERS = {"dcd1": npsvor.train_rank_dcd1, "dcd2": npsvor.train_rank_dcd2}


def trace_solver(data, k, cfg: SolverConfig, algorithm: str, f_ref: float, stop_rel: float) -> ConvergenceTrace:
    """Run one solver from a cold start, logging the dual objective after every sweep."""
    tr = ConvergenceTrace(algorithm)
    build = npsvor.rank_problem_dcd1 if algorithm == "dcd1" else npsvor.rank_problem_dcd2
    prob = build(data, k, cfg)

    def cb(state, alpha, w, solve_time):
        f = prob.objective(alpha, w)
        tr.times.append(solve_time)
        tr.objective.append(f)
        return (f - f_ref) / abs(f_ref) <= stop_rel

    _RANK_SOLVERS[algorithm](data, k, cfg, callback=cb)
    return tr


def bench_convergence(data, cfg: SolverConfig = SolverConfig(), k: int = 3, ref_tol: float = 1e-10,
                      ref_max_sweeps: int = 100000, stop_rel: float = 1e-4, reference=None,
                      algorithms=("dcd1", "dcd2")) -> ConvergenceResult:
    """Relative dual-objective gap versus CPU time for both NPSVOR solvers on rank ``k``.

    The optimum is approximated by a long DCD-2 run (``ref_tol``) unless
    ``reference=(f_ref, converged)`` is supplied. Gaps are measured against
    the best objective seen anywhere, so they are never negative.
    """
    if reference is None:
        ref_cfg = cfg.replace(eps_stop=ref_tol, max_sweeps=ref_max_sweeps)
        with np.errstate(all="ignore"):
            fit = npsvor.train_rank_dcd2(data, k, ref_cfg)
        f_ref = npsvor.dual_objective_dcd2(fit.state, data, k, cfg)
        reference = (f_ref, fit.converged)
    f_ref, ref_ok = reference
    trace_cfg = cfg.replace(eps_stop=1e-14, max_sweeps=ref_max_sweeps)
    traces = {a: trace_solver(data, k, trace_cfg, a, f_ref, stop_rel) for a in algorithms}
    f_star = min([f_ref] + [min(t.objective) for t in traces.values()])
    for t in traces.values():
        t.finalize(f_star)
    return ConvergenceResult(k, f_star, ref_ok, traces)


def count_support(model) -> int:
    return int(sum(model.n_support))


def bench_epsilon(train, test, eps_grid=(0.0, 0.1, 0.2, 0.3, 0.4, 0.5),
                  cfg: SolverConfig = SolverConfig(), repeats: int = 1):
    """MAE, MSE, solver CPU time and support-vector count per epsilon, plus ratios to epsilon = 0."""
    eps_grid = list(eps_grid)
    if 0.0 not in eps_grid:
        raise ValueError("epsilon grid must include 0")
    # repeats run round-robin over the grid so load drift hits every eps alike
    times = {eps: [] for eps in eps_grid}
    models = {}
    for _ in range(repeats):
        for eps in eps_grid:
            models[eps] = npsvor.train(train, cfg.replace(eps=eps))
            times[eps].append(models[eps].solve_time)
    rows = []
    for eps in eps_grid:
        rep = evaluate(test.y, models[eps].predict(test), train.p)
        rows.append({"eps": eps, "mae": rep.mae, "mse": rep.mse,
                     "time": float(np.median(times[eps])), "nsv": count_support(models[eps])})
    base = next(r for r in rows if r["eps"] == 0.0)
    for r in rows:
        for key in ("mae", "mse", "time", "nsv"):
            r[f"{key}_ratio"] = r[key] / base[key] if base[key] else float("nan")
    return rows


def bench_predictors(train, test, cfg: SolverConfig = SolverConfig(), model=None):
    """Both rank rules applied to one trained NPSVOR model."""
    model = model or npsvor.train(train, cfg)
    out = {}
    for rule in ("old", "new"):
        rep = evaluate(test.y, model.predict(test, predictor=rule), train.p)
        out[rule] = {"mae": rep.mae, "mse": rep.mse}
    return {"mae_old": out["old"]["mae"], "mae_new": out["new"]["mae"],
            "mse_old": out["old"]["mse"], "mse_new": out["new"]["mse"]}


def bench_methods(datasets: dict, solvers=("svc", "svr", "redsvm", "npsvor-dcd2"), grid=None,
                  cfg: SolverConfig = SolverConfig(), folds: int = 5, seed: int = 0,
                  svr_eps_stop: float = 0.01, n_jobs: int = 1):
    """Grid-search C on each training set, retrain at the best C, score the test set.

    ``datasets`` maps a name to ``(train, test)``. Records carry the test
    MAE/MSE, the confusion matrix and the CPU time of the final fit.
    """
    from .evaluation import tied_grid
    grid = tied_grid() if grid is None else grid
    records = []
    for name, (train, test) in datasets.items():
        for solver in solvers:
            c = cfg.replace(eps_stop=svr_eps_stop) if solver == "svr" else cfg
            gs = grid_search(train, solver, grid, c, folds, seed, n_jobs=n_jobs)
            c1, c2 = gs.best
            best_cfg = c.replace(C1=c1, C2=c2)
            t0 = time.process_time()
            model = get_trainer(solver)(train, best_cfg)
            elapsed = time.process_time() - t0
            rep = evaluate(test.y, model.predict(test), train.p)
            records.append({"dataset": name, "solver": solver, "C1": c1, "C2": c2,
                            "mae": rep.mae, "mse": rep.mse, "accuracy": rep.accuracy,
                            "train_time": elapsed, "confusion": rep.confusion.tolist()})
    _attach_average_rank(records, "mae")
    _attach_average_rank(records, "mse")
    return records


def _attach_average_rank(records, metric):
    from scipy.stats import rankdata
    by_ds = {}
    for r in records:
        by_ds.setdefault(r["dataset"], []).append(r)
    for rows in by_ds.values():
        ranks = rankdata([r[metric] for r in rows])
        for r, rk in zip(rows, ranks):
            r[f"{metric}_rank"] = float(rk)


def average_ranks(records, metric="mae"):
    out = {}
    for r in records:
        out.setdefault(r["solver"], []).append(r[f"{metric}_rank"])
    return {s: float(np.mean(v)) for s, v in out.items()}


def write_jsonl(records, path):
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r, sort_keys=True) + "\n")


def render_table(records, columns=None, floatfmt=".4f") -> str:
    """Aligned text table; nested values (e.g. confusion matrices) are skipped."""
    if not records:
        return ""
    columns = columns or [k for k, v in records[0].items() if not isinstance(v, (list, dict))]

    def cell(v):
        if isinstance(v, float):
            return format(v, floatfmt)
        return str(v)

    body = [[cell(r.get(c, "")) for c in columns] for r in records]
    widths = [max(len(c), *(len(row[i]) for row in body)) for i, c in enumerate(columns)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(columns, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in body]
    return "\n".join(lines)
