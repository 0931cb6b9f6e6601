"""Linear NPSVOR: one proximal hyperplane per rank, trained by dual coordinate descent.

For rank ``k`` the instances split into those below, at and above ``k``.
The hyperplane ``w_k`` is pulled into an epsilon-tube around rank-``k``
instances (weight ``C1``) while lower/higher ranks are pushed to the
negative/positive side with a hinge loss (weight ``C2``).

Two solvers are provided. ``dcd1`` works on the original dual with separate
upper/lower tube multipliers (``n + l`` variables). ``dcd2`` merges each pair
into one signed variable, which turns its subproblem into a soft-threshold
step and leaves ``n`` variables.
"""
from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dcd import DualProblem, solve
from .sparse import SparseDataset, SparseVector, align_features, decompose

SV_THRESHOLD = 1e-9


@dataclass(frozen=True)
class SolverConfig:
    C1: float = 1.0
    C2: float | None = None
    eps: float = 0.1
    eps_stop: float = 0.1
    shrinking: bool = True
    max_sweeps: int = 1000
    seed: int = 0
    algorithm: str = "dcd2"

    def __post_init__(self):
        if self.C2 is None:
            object.__setattr__(self, "C2", self.C1)
        if not (self.C1 > 0 and self.C2 > 0):
            raise ValueError("C1 and C2 must be positive")
        if self.eps < 0:
            raise ValueError("eps must be non-negative")
        if not self.eps_stop > 0:
            raise ValueError("eps_stop must be positive")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be at least 1")
        if self.algorithm not in ("dcd1", "dcd2"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")

    def replace(self, **changes) -> "SolverConfig":
        if "C1" in changes and "C2" not in changes:
            changes["C2"] = changes["C1"]
        return dataclasses.replace(self, **changes)


@dataclass
class DualStateDCD2:
    alpha: np.ndarray
    w: np.ndarray


@dataclass
class DualStateDCD1:
    alpha_minus: np.ndarray
    alpha_plus: np.ndarray
    beta: np.ndarray
    w: np.ndarray
    middle: np.ndarray
    outside: np.ndarray

    @property
    def merged(self) -> np.ndarray:
        """The equivalent DCD-2 variables (alpha_plus - alpha_minus on the tube set)."""
        n = self.middle.size + self.outside.size
        a = np.empty(n)
        a[self.middle] = self.alpha_plus - self.alpha_minus
        a[self.outside] = self.beta
        return a


@dataclass
class RankFit:
    k: int
    w: np.ndarray
    state: DualStateDCD1 | DualStateDCD2
    sweeps: int
    converged: bool
    solve_time: float
    problem: DualProblem

    @property
    def n_support(self) -> int:
        if isinstance(self.state, DualStateDCD2):
            return int(np.sum(np.abs(self.state.alpha) > SV_THRESHOLD))
        return int(np.sum(np.abs(self.state.merged) > SV_THRESHOLD))


def rank_problem_dcd2(data: SparseDataset, k: int, cfg: SolverConfig) -> DualProblem:
    dec = decompose(data, k)
    mid = data.y == k
    return DualProblem(
        X=data.X,
        var_row=np.arange(data.n),
        sign=dec.signed_label,
        lin=np.where(mid, 0.0, -1.0),
        upper=np.where(mid, cfg.C1, cfg.C2),
        soft=mid,
        eps=cfg.eps,
        sqnorm=data.squared_norms,
    )


def rank_problem_dcd1(data: SparseDataset, k: int, cfg: SolverConfig) -> DualProblem:
    # variable layout: [alpha_minus over I | alpha_plus over I | beta over the rest]
    dec = decompose(data, k)
    mid = dec.middle
    out = np.sort(np.concatenate([dec.left, dec.right]))
    l, r = mid.size, out.size
    return DualProblem(
        X=data.X,
        var_row=np.concatenate([mid, mid, out]),
        sign=np.concatenate([np.ones(l), -np.ones(l), dec.signed_label[out]]),
        lin=np.concatenate([np.full(2 * l, cfg.eps), -np.ones(r)]),
        upper=np.concatenate([np.full(2 * l, cfg.C1), np.full(r, cfg.C2)]),
        soft=np.zeros(2 * l + r, dtype=bool),
        eps=0.0,
        sqnorm=data.squared_norms,
    )


def _rank_seed(cfg: SolverConfig, k: int):
    return [cfg.seed, k]


def train_rank_dcd2(data: SparseDataset, k: int, cfg: SolverConfig,
                    callback=None, engine: str = "numba") -> RankFit:
    prob = rank_problem_dcd2(data, k, cfg)
    res = solve(prob, cfg.eps_stop, cfg.shrinking, cfg.max_sweeps,
                seed=_rank_seed(cfg, k), engine=engine, callback=callback)
    return RankFit(k, res.w, DualStateDCD2(res.alpha, res.w), res.sweeps,
                   res.converged, res.solve_time, prob)


def train_rank_dcd1(data: SparseDataset, k: int, cfg: SolverConfig,
                    callback=None, engine: str = "numba") -> RankFit:
    """Every sweep visits all ``n + l`` variables in random order; ``cfg.shrinking`` is ignored."""
    prob = rank_problem_dcd1(data, k, cfg)
    res = solve(prob, cfg.eps_stop, False, cfg.max_sweeps, seed=_rank_seed(cfg, k),
                engine=engine, callback=callback)
    dec = decompose(data, k)
    l = dec.middle.size
    out = np.sort(np.concatenate([dec.left, dec.right]))
    state = DualStateDCD1(res.alpha[:l].copy(), res.alpha[l:2 * l].copy(),
                          res.alpha[2 * l:].copy(), res.w, dec.middle, out)
    return RankFit(k, res.w, state, res.sweeps, res.converged, res.solve_time, prob)


def dual_objective_dcd2(state: DualStateDCD2, data: SparseDataset, k: int, cfg: SolverConfig) -> float:
    """Merged-variable dual objective, with ``w`` recomputed from ``alpha``."""
    dec = decompose(data, k)
    alpha = np.asarray(state.alpha)
    w = np.asarray(data.X.T @ (dec.signed_label * alpha)).ravel()
    mid = data.y == k
    return float(0.5 * w @ w + cfg.eps * np.abs(alpha[mid]).sum() - alpha[~mid].sum())


def dual_objective_dcd1(state: DualStateDCD1, data: SparseDataset, k: int, cfg: SolverConfig) -> float:
    dec = decompose(data, k)
    X = data.X
    w = (np.asarray(X[state.middle].T @ (state.alpha_minus - state.alpha_plus)).ravel()
         + np.asarray(X[state.outside].T @ (dec.signed_label[state.outside] * state.beta)).ravel())
    return float(0.5 * w @ w + cfg.eps * (state.alpha_plus.sum() + state.alpha_minus.sum())
                 - state.beta.sum())


def recompute_weight(state, data: SparseDataset, k: int) -> np.ndarray:
    alpha = state.alpha if isinstance(state, DualStateDCD2) else state.merged
    return np.asarray(data.X.T @ (decompose(data, k).signed_label * alpha)).ravel()


def _as_matrix(model, data):
    if isinstance(data, SparseDataset):
        X = data.X[:, :data.m - 1] if data.bias_augmented else data.X
        return align_features(X, model.n_raw_features, model.bias)
    return align_features(data, model.n_raw_features, model.bias)


def rank_by_distance(scores: np.ndarray) -> np.ndarray:
    """Nearest hyperplane by ``|w_k'x|``; argmin takes the first (smallest) rank on ties."""
    return np.argmin(np.abs(scores), axis=1) + 1


def rank_by_pairs(scores: np.ndarray) -> np.ndarray:
    """``1 + #{k : f_k(x) + f_{k+1}(x) > 0}`` over adjacent hyperplane pairs."""
    pair = scores[:, :-1] + scores[:, 1:]
    return 1 + np.sum(pair > 0, axis=1)


@dataclass
class OrdinalModel:
    weights: np.ndarray
    labels: np.ndarray
    bias: float | None
    predictor: str = "new"
    solver: str = "npsvor-dcd2"
    converged: tuple = ()
    sweeps: tuple = ()
    n_support: tuple = ()
    solve_time: float = 0.0   # CPU seconds inside the solver, summed over ranks

    def __post_init__(self):
        self.weights = np.atleast_2d(np.asarray(self.weights, dtype=float))
        self.labels = np.asarray(self.labels)
        if self.weights.shape[0] != self.labels.shape[0]:
            raise ValueError("need one weight vector per rank")
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("non-finite weights")
        if self.predictor not in ("old", "new"):
            raise ValueError("predictor must be 'old' or 'new'")

    @property
    def p(self) -> int:
        return self.weights.shape[0]

    @property
    def m(self) -> int:
        return self.weights.shape[1]

    @property
    def n_raw_features(self) -> int:
        return self.m - 1 if self.bias is not None else self.m

    def decision_values(self, data) -> np.ndarray:
        X = _as_matrix(self, data)
        return np.asarray(X @ self.weights.T)

    def predict(self, data, predictor: str | None = None) -> np.ndarray:
        scores = self.decision_values(data)
        rule = predictor or self.predictor
        if rule == "old":
            return rank_by_distance(scores)
        if rule == "new":
            return rank_by_pairs(scores)
        raise ValueError(f"unknown predictor {rule!r}")


def _vector_scores(model: OrdinalModel, x: SparseVector) -> np.ndarray:
    keep = x.indices < model.m
    return model.weights[:, x.indices[keep]] @ x.values[keep]


def predict_old(model: OrdinalModel, x: SparseVector) -> int:
    """Rank of one vector given in the model's (bias-augmented) feature space."""
    return int(rank_by_distance(_vector_scores(model, x)[None, :])[0])


def predict_new(model: OrdinalModel, x: SparseVector) -> int:
    """Rank of one vector given in the model's (bias-augmented) feature space."""
    return int(rank_by_pairs(_vector_scores(model, x)[None, :])[0])


def train(data: SparseDataset, cfg: SolverConfig = SolverConfig(), predictor: str = "new",
          n_jobs: int = 1, engine: str = "numba") -> OrdinalModel:
    """Fit all ``p`` rank subproblems; they are independent and may run on threads."""
    fit_rank = train_rank_dcd2 if cfg.algorithm == "dcd2" else train_rank_dcd1
    ranks = range(1, data.p + 1)
    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            fits = list(pool.map(lambda k: fit_rank(data, k, cfg, engine=engine), ranks))
    else:
        fits = [fit_rank(data, k, cfg, engine=engine) for k in ranks]
    return OrdinalModel(
        weights=np.vstack([f.w for f in fits]),
        labels=data.labels,
        bias=data.bias,
        predictor=predictor,
        solver=f"npsvor-{cfg.algorithm}",
        converged=tuple(f.converged for f in fits),
        sweeps=tuple(f.sweeps for f in fits),
        n_support=tuple(f.n_support for f in fits),
        solve_time=float(sum(f.solve_time for f in fits)),
    )
