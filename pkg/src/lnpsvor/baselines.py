"""Linear comparison methods: one-vs-all SVC, epsilon-SVR with rounding, RedSVM."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .dcd import DualProblem, solve
from .npsvor import SolverConfig, _as_matrix
from .sparse import SparseDataset


class _LinearModel:
    @property
    def n_raw_features(self) -> int:
        return self.m - 1 if self.bias is not None else self.m

    @property
    def p(self) -> int:
        return self.labels.shape[0]


@dataclass
class OvaModel(_LinearModel):
    weights: np.ndarray
    labels: np.ndarray
    bias: float | None
    solver: str = "svc"
    converged: tuple = ()

    @property
    def m(self) -> int:
        return self.weights.shape[1]

    def decision_values(self, data) -> np.ndarray:
        return np.asarray(_as_matrix(self, data) @ self.weights.T)

    def predict(self, data) -> np.ndarray:
        return np.argmax(self.decision_values(data), axis=1) + 1


@dataclass
class SvrModel(_LinearModel):
    w: np.ndarray
    labels: np.ndarray
    bias: float | None
    solver: str = "svr"
    converged: tuple = ()

    @property
    def m(self) -> int:
        return self.w.shape[0]

    @property
    def weights(self) -> np.ndarray:
        return self.w[None, :]

    def decision_values(self, data) -> np.ndarray:
        return np.asarray(_as_matrix(self, data) @ self.w).ravel()

    def predict(self, data) -> np.ndarray:
        return round_to_rank(self.decision_values(data), self.p)


@dataclass
class RedSvmModel(_LinearModel):
    w: np.ndarray
    thresholds: np.ndarray
    labels: np.ndarray
    bias: float | None
    solver: str = "redsvm"
    converged: tuple = ()

    @property
    def m(self) -> int:
        return self.w.shape[0]

    @property
    def weights(self) -> np.ndarray:
        return self.w[None, :]

    @property
    def thresholds_ordered(self) -> bool:
        return bool(np.all(np.diff(self.thresholds) >= 0))

    def decision_values(self, data) -> np.ndarray:
        """Scores ``w'x - theta_k`` of the ``p - 1`` binary questions "rank > k?"."""
        s = np.asarray(_as_matrix(self, data) @ self.w).ravel()
        return s[:, None] - self.thresholds[None, :]

    def predict(self, data) -> np.ndarray:
        return 1 + np.sum(self.decision_values(data) > 0, axis=1)


def round_to_rank(values, p: int) -> np.ndarray:
    """Round half away from zero, then clamp into ``1..p``."""
    values = np.asarray(values, dtype=float)
    r = np.sign(values) * np.floor(np.abs(values) + 0.5)
    return np.clip(r, 1, p).astype(np.int64)


def _binary_hinge_problem(X, signs, C: float) -> DualProblem:
    n = X.shape[0]
    return DualProblem(X=X, var_row=np.arange(n), sign=signs, lin=-np.ones(n),
                       upper=np.full(n, C), soft=np.zeros(n, dtype=bool))


def train_svc_ova(data: SparseDataset, cfg: SolverConfig = SolverConfig()) -> OvaModel:
    weights, conv = [], []
    for k in range(1, data.p + 1):
        prob = _binary_hinge_problem(data.X, np.where(data.y == k, 1.0, -1.0), cfg.C1)
        res = solve(prob, cfg.eps_stop, cfg.shrinking, cfg.max_sweeps, seed=[cfg.seed, k])
        weights.append(res.w)
        conv.append(res.converged)
    return OvaModel(np.vstack(weights), data.labels, data.bias, converged=tuple(conv))


def svr_problem(data: SparseDataset, cfg: SolverConfig) -> DualProblem:
    n = data.n
    return DualProblem(X=data.X, var_row=np.arange(n), sign=np.ones(n),
                       lin=-data.y.astype(float), upper=np.full(n, cfg.C1),
                       soft=np.ones(n, dtype=bool), eps=cfg.eps)


def train_svr(data: SparseDataset, cfg: SolverConfig = SolverConfig(), return_dual: bool = False):
    """L1-loss epsilon-insensitive regression on the ranks, one signed dual per instance."""
    prob = svr_problem(data, cfg)
    res = solve(prob, cfg.eps_stop, cfg.shrinking, cfg.max_sweeps, seed=cfg.seed)
    model = SvrModel(res.w, data.labels, data.bias, converged=(res.converged,))
    return (model, res) if return_dual else model


@dataclass
class ExtendedBinary:
    X: sp.csr_matrix
    signs: np.ndarray
    n_base_features: int


def extend_redsvm(data: SparseDataset) -> ExtendedBinary:
    """Row ``(i, k)`` is ``x_i`` followed by ``-e_k`` in ``p - 1`` extra columns, label ``+1`` iff ``y_i > k``."""
    n, m, q = data.n, data.m, data.p - 1
    rows = np.repeat(np.arange(n), q)
    ks = np.tile(np.arange(1, q + 1), n)
    base = data.X[rows]
    ext = sp.csr_matrix((-np.ones(n * q), (np.arange(n * q), ks - 1)), shape=(n * q, q))
    X = sp.hstack([base, ext], format="csr")
    X.sort_indices()
    signs = np.where(data.y[rows] > ks, 1.0, -1.0)
    return ExtendedBinary(X, signs, m)


def train_redsvm(data: SparseDataset, cfg: SolverConfig = SolverConfig()) -> RedSvmModel:
    ext = extend_redsvm(data)
    prob = _binary_hinge_problem(ext.X, ext.signs, cfg.C1)
    res = solve(prob, cfg.eps_stop, cfg.shrinking, cfg.max_sweeps, seed=cfg.seed)
    m = ext.n_base_features
    return RedSvmModel(res.w[:m].copy(), res.w[m:].copy(), data.labels, data.bias,
                       converged=(res.converged,))


def predict_svr(model: SvrModel, x) -> int:
    return int(round_to_rank([x.dot(model.w)], model.p)[0])


def predict_redsvm(model: RedSvmModel, x) -> int:
    s = x.dot(model.w)
    return 1 + int(np.sum(s - model.thresholds > 0))
