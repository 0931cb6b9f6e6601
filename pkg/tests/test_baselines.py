import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from lnpsvor.baselines import (extend_redsvm, predict_redsvm, predict_svr, round_to_rank, train_redsvm,
                               train_svc_ova, train_svr)
from lnpsvor.npsvor import SolverConfig
from lnpsvor.sparse import SparseDataset, SparseVector

from oracles import dual_value, fista_dual, random_tiny

TIGHT = dict(eps_stop=1e-8, max_sweeps=200000)


def _dataset(X, y, bias=1.0, **kw):
    d = SparseDataset(sp.csr_matrix(np.asarray(X, dtype=float)), np.asarray(y), **kw)
    return d.with_bias(bias) if bias else d


def _three_clusters():
    spread = np.linspace(-0.2, 0.2, 20)
    x = np.concatenate([-2 + spread, spread, 2 + spread])
    return _dataset(x[:, None], np.repeat([1, 2, 3], 20))


# -- SVR --------------------------------------------------------------------

def test_svr_single_instance():
    d = SparseDataset(sp.csr_matrix([[1.0]]), np.array([1]), labels=np.array([1, 2]), check_ranks=False)
    model, res = train_svr(d, SolverConfig(C1=10.0, eps=0.1, **TIGHT), return_dual=True)
    assert res.alpha[0] == pytest.approx(0.9, abs=1e-9)
    assert model.w[0] == pytest.approx(0.9, abs=1e-9)


def test_svr_constant_target():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((30, 3))
    d = _dataset(X, np.full(30, 2), labels=np.array([1, 2, 3]), check_ranks=False)
    model = train_svr(d, SolverConfig(C1=10.0, eps=0.1, **TIGHT))
    assert np.all(np.abs(model.decision_values(d) - 2.0) <= 0.1 + 1e-6)
    assert np.all(model.predict(d) == 2)


@pytest.mark.parametrize("value, p, rank", [(3.49, 5, 3), (3.5, 5, 4), (-0.2, 5, 1), (2.5, 5, 3),
                                            (5.7, 5, 5), (1.5, 3, 2), (0.5, 3, 1), (-1.5, 3, 1)])
def test_rounding(value, p, rank):
    assert round_to_rank([value], p)[0] == rank


def test_svr_interior_residuals():
    d = _three_clusters()
    cfg = SolverConfig(C1=1.0, eps=0.1, **TIGHT)
    model, res = train_svr(d, cfg, return_dual=True)
    beta = res.alpha
    interior = (np.abs(beta) > 1e-9) & (np.abs(beta) < cfg.C1 - 1e-9)
    resid = np.abs(model.decision_values(d) - d.y)
    assert np.all(resid[interior] <= cfg.eps + 1e-6)
    assert np.all(resid[beta == 0] <= cfg.eps + 1e-6)


def test_svr_vector_predictor():
    d = _three_clusters()
    model = train_svr(d, SolverConfig())
    assert [predict_svr(model, d.row(i)) for i in range(d.n)] == model.predict(d).tolist()


# -- RedSVM -----------------------------------------------------------------

def test_extension_rows():
    d = SparseDataset(sp.csr_matrix([[0.5, 2.0], [1.0, 0.0], [0.0, 3.0], [1.0, 1.0]]),
                      np.array([3, 1, 4, 2]))
    ext = extend_redsvm(d)
    assert ext.X.shape == (12, 2 + 3)
    rows = ext.X.toarray()
    np.testing.assert_array_equal(rows[:3], [[0.5, 2.0, -1, 0, 0], [0.5, 2.0, 0, -1, 0], [0.5, 2.0, 0, 0, -1]])
    assert ext.signs[:3].tolist() == [1, 1, -1]
    assert ext.signs[3:6].tolist() == [-1, -1, -1]     # y = 1
    assert ext.signs[6:9].tolist() == [1, 1, 1]        # y = p
    assert np.all(np.diff(ext.X.indptr) == np.repeat(np.diff(d.X.indptr), 3) + 1)


def test_redsvm_one_dimensional_thresholds():
    d = _three_clusters()
    for cfg in (SolverConfig(C1=1.0, **TIGHT), SolverConfig(C1=1.0)):
        model = train_redsvm(d, cfg)
        w, b = model.w
        cuts = (model.thresholds - b) / w      # boundary x where w x + b = theta_k
        assert w > 0 and model.thresholds_ordered
        assert -1.8 < cuts[0] < -0.2 and 0.2 < cuts[1] < 1.8
        assert np.mean(model.predict(d) == d.y) == 1.0


def test_redsvm_parallel_boundaries_and_rank_one():
    d = _three_clusters()
    model = train_redsvm(d, SolverConfig())
    s = model.decision_values(d)
    np.testing.assert_allclose(np.diff(s, axis=1), -np.diff(model.thresholds)[None, :].repeat(d.n, 0))
    low = SparseVector(np.array([0, 1]), np.array([-50.0, 1.0]))
    assert predict_redsvm(model, low) == 1
    assert [predict_redsvm(model, d.row(i)) for i in range(d.n)] == model.predict(d).tolist()


def test_redsvm_threshold_order_is_reported():
    X, y = random_tiny(np.random.default_rng(5), n=30, m=3, p=4)
    model = train_redsvm(_dataset(X, y), SolverConfig())
    assert isinstance(model.thresholds_ordered, bool)


# -- OvA --------------------------------------------------------------------

def test_ova_separable():
    rng = np.random.default_rng(1)
    centres = np.array([[0, 4], [4, -2], [-4, -2]])
    X = np.vstack([rng.normal(c, 0.3, (15, 2)) for c in centres])
    d = _dataset(X, np.repeat([1, 2, 3], 15))
    model = train_svc_ova(d, SolverConfig(C1=1.0))
    assert np.mean(model.predict(d) == d.y) == 1.0


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-3, 1e3))
def test_ova_scale_invariance(scale):
    rng = np.random.default_rng(2)
    X, y = random_tiny(rng, n=30, m=4, p=3)
    d = _dataset(X, y)
    model = train_svc_ova(d, SolverConfig())
    base = model.predict(d)
    model.weights = model.weights * scale
    assert np.array_equal(model.predict(d), base)


def test_ova_tie_goes_to_smallest_rank():
    from lnpsvor.baselines import OvaModel
    m = OvaModel(np.array([[1.0], [1.0], [0.0]]), np.array([1, 2, 3]), None)
    assert m.predict(sp.csr_matrix([[2.0]])).tolist() == [1]


# -- agreement with an independent dual solver ------------------------------

def _hinge_primal(w, Z, C):
    return 0.5 * w @ w + C * np.maximum(0.0, 1.0 - Z @ w).sum()


def _hinge_oracle(X, signs, C):
    Z = signs[:, None] * X
    n = Z.shape[0]
    a, _ = fista_dual(Z @ Z.T, -np.ones(n), np.zeros(n), np.zeros(n), np.full(n, C))
    return -dual_value(Z @ Z.T, -np.ones(n), np.zeros(n), a), Z


@pytest.mark.parametrize("seed", range(4))
def test_baselines_match_oracle(seed):
    rng = np.random.default_rng(100 + seed)
    X, y = random_tiny(rng, n=int(rng.integers(8, 25)), m=int(rng.integers(1, 5)), p=int(rng.integers(2, 5)))
    d = _dataset(X, y)
    Xa = d.X.toarray()
    C = float(2.0 ** rng.integers(-2, 3))
    cfg = SolverConfig(C1=C, eps=0.1, **TIGHT)

    ova = train_svc_ova(d, cfg)
    for k in range(1, d.p + 1):
        ref, Z = _hinge_oracle(Xa, np.where(d.y == k, 1.0, -1.0), C)
        assert _hinge_primal(ova.weights[k - 1], Z, C) == pytest.approx(ref, rel=1e-5, abs=1e-9)

    svr = train_svr(d, cfg)
    n = d.n
    a, _ = fista_dual(Xa @ Xa.T, -d.y.astype(float), np.full(n, 0.1), np.full(n, -C), np.full(n, C))
    ref = -dual_value(Xa @ Xa.T, -d.y.astype(float), np.full(n, 0.1), a)
    primal = 0.5 * svr.w @ svr.w + C * np.maximum(np.abs(Xa @ svr.w - d.y) - 0.1, 0).sum()
    assert primal == pytest.approx(ref, rel=1e-5, abs=1e-9)

    # extended rows built here without the package helper
    q = d.p - 1
    rows, signs = [], []
    for i in range(n):
        for k in range(1, q + 1):
            e = np.zeros(q)
            e[k - 1] = -1.0
            rows.append(np.concatenate([Xa[i], e]))
            signs.append(1.0 if d.y[i] > k else -1.0)
    ref, Z = _hinge_oracle(np.array(rows), np.array(signs), C)
    red = train_redsvm(d, cfg)
    assert _hinge_primal(np.concatenate([red.w, red.thresholds]), Z, C) == pytest.approx(ref, rel=1e-5, abs=1e-9)
