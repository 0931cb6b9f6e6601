"""Reproducible synthetic ordinal datasets for solver benchmarks and predictor demos."""
from __future__ import annotations

import json
from importlib import resources

import numpy as np
import scipy.sparse as sp

from .sparse import SparseDataset


def load_config(version: int = 1) -> dict:
    path = resources.files("lnpsvor").joinpath(f"data/synthetic_v{version}.json")
    return json.loads(path.read_text(encoding="utf-8"))


def sparse_ordinal(n=None, m=None, p=None, nnz_mean=None, popularity_exponent=None,
                   label_noise=None, bias=None, seed=None) -> SparseDataset:
    """Text-like sparse rows with ranks cut from a noisy linear score.

    Row lengths are geometric with mean ``nnz_mean``; columns are drawn with
    power-law popularity; stored values are positive and rows have unit L2
    norm. Ranks come from equal-frequency bins of ``x'u + noise``. Arguments
    left as None take the versioned defaults from ``synthetic_v1.json``.
    """
    cfg = dict(load_config()["sparse"])
    for key, val in dict(n=n, m=m, p=p, nnz_mean=nnz_mean, popularity_exponent=popularity_exponent,
                         label_noise=label_noise, bias=bias, seed=seed).items():
        if val is not None:
            cfg[key] = val
    rng = np.random.default_rng(cfg["seed"])
    n, m, p = cfg["n"], cfg["m"], cfg["p"]
    lengths = np.minimum(rng.geometric(1.0 / cfg["nnz_mean"], size=n), m)
    pop = (np.arange(m) + 10.0) ** -cfg["popularity_exponent"]
    pop /= pop.sum()
    cols = rng.choice(m, size=lengths.sum(), p=pop)
    rows = np.repeat(np.arange(n), lengths)
    vals = rng.exponential(1.0, size=cols.size)
    X = sp.csr_matrix((vals, (rows, cols)), shape=(n, m))  # duplicates are summed
    X.sort_indices()
    norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
    X = sp.diags(1.0 / norms) @ X
    u = rng.standard_normal(m)
    score = X @ u
    score = score + cfg["label_noise"] * score.std() * rng.standard_normal(n)
    cuts = np.quantile(score, np.arange(1, p) / p)
    y = 1 + np.searchsorted(cuts, score)
    data = SparseDataset(X.tocsr(), y)
    return data.with_bias(cfg["bias"]) if cfg["bias"] else data


def fan_clusters(seed=None, n_per_rank=None, angles_deg=None, gap=None, major_sd=None,
                 minor_sd=None, bias=None) -> SparseDataset:
    """Three elongated 2-D Gaussian clusters whose long axes fan towards each other.

    Cluster ``k`` is centred at ``(gap * (k - 1), 0)`` with its long axis at
    ``angles_deg[k - 1]``. The fitted per-rank hyperplanes follow those axes,
    so they intersect above the clusters and leave a region where the
    nearest hyperplane belongs to the far rank.
    """
    cfg = dict(load_config()["fan"])
    for key, val in dict(seed=seed, n_per_rank=n_per_rank, angles_deg=angles_deg, gap=gap,
                         major_sd=major_sd, minor_sd=minor_sd, bias=bias).items():
        if val is not None:
            cfg[key] = val
    rng = np.random.default_rng(cfg["seed"])
    n = cfg["n_per_rank"]
    X, y = [], []
    for k, deg in enumerate(cfg["angles_deg"]):
        t = np.deg2rad(deg)
        axis = np.array([np.cos(t), np.sin(t)])
        normal = np.array([np.sin(t), -np.cos(t)])
        s = rng.standard_normal(n) * cfg["major_sd"]
        r = rng.standard_normal(n) * cfg["minor_sd"]
        X.append(np.outer(s, axis) + np.outer(r, normal) + [cfg["gap"] * k, 0.0])
        y.append(np.full(n, k + 1))
    data = SparseDataset(sp.csr_matrix(np.vstack(X)), np.concatenate(y))
    return data.with_bias(cfg["bias"]) if cfg["bias"] else data


def fan_probes():
    """Probe points ``[(name, xy, true_rank)]`` lying in the ambiguity region of :func:`fan_clusters`."""
    return [(p["name"], np.array(p["point"], dtype=float), p["rank"]) for p in load_config()["fan"]["probes"]]
