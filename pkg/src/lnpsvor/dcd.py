"""Dual coordinate descent engine shared by every linear solver in the package.

Every dual handled here has the form

    f(a) = 1/2 w'w + sum_j lin_j a_j + eps * sum_{j soft} |a_j|,
    w    = sum_j sign_j a_j x_{row_j},

with ``0 <= a_j <= upper_j`` for box variables and ``|a_j| <= upper_j`` for
soft (absolute-value) variables. NPSVOR, one-vs-all SVC, epsilon-SVR and the
threshold-extended RedSVM problem are all instances, differing only in the
per-variable arrays of :class:`DualProblem`.
"""
from __future__ import annotations

import enum
import time
import warnings
from dataclasses import dataclass, field

import numba
import numpy as np
import scipy.sparse as sp

INF = float("inf")


class ConvergenceWarning(UserWarning):
    pass


@numba.njit(cache=True, nogil=True)
def _box_update(A, G, alpha, upper):
    if alpha == 0.0:
        v = min(G, 0.0)
    elif alpha == upper:
        v = max(G, 0.0)
    else:
        v = G
    new = min(max(alpha - G / A, 0.0), upper)
    return new, v


@numba.njit(cache=True, nogil=True)
def _soft_update(A, B, alpha, eps, bound):
    gp = B + eps
    gn = B - eps
    if alpha == 0.0:
        v = gn if gn > 0.0 else (gp if gp < 0.0 else 0.0)
    elif alpha == bound:
        v = max(0.0, gp)
    elif alpha == -bound:
        v = min(0.0, gn)
    elif alpha > 0.0:
        v = gp
    else:
        v = gn
    if gp < A * alpha:
        d = -gp / A
    elif gn > A * alpha:
        d = -gn / A
    else:
        d = -alpha
    new = min(max(alpha + d, -bound), bound)
    return new, v


@numba.njit(cache=True, nogil=True)
def _shrink_box(alpha, G, upper, M):
    return (alpha == 0.0 and G > M) or (alpha == upper and G < -M)


@numba.njit(cache=True, nogil=True)
def _shrink_soft(alpha, gp, gn, bound, M):
    return ((alpha == 0.0 and gn < -M and gp > M)
            or (alpha == bound and gp < -M)
            or (alpha == -bound and gn > M))


def box_step(A: float, B: float, alpha: float, upper: float):
    """Minimise ``1/2 A (s - alpha)^2 + (B - 1) s`` over ``[0, upper]``.

    Returns the new value and the projected gradient at the old ``alpha``.
    """
    if not A > 0:
        raise ValueError("A must be positive; zero rows are skipped by the caller")
    if not 0 <= alpha <= upper:
        raise ValueError("alpha outside [0, upper]")
    return _box_update(float(A), float(B) - 1.0, float(alpha), float(upper))


def soft_thresh_step(A: float, B: float, alpha: float, eps: float, bound: float):
    """Minimise ``1/2 A (s - alpha)^2 + B s + eps |s|`` over ``[-bound, bound]``.

    Returns the new value and the optimality violation at the old ``alpha``.
    """
    if not A > 0:
        raise ValueError("A must be positive; zero rows are skipped by the caller")
    if eps < 0 or not -bound <= alpha <= bound:
        raise ValueError("invalid soft-threshold input")
    return _soft_update(float(A), float(B), float(alpha), float(eps), float(bound))


def shrink_test_box(alpha: float, violation: float, upper: float, M: float) -> bool:
    # ``violation`` is the raw derivative h'(alpha), not its projection
    return bool(_shrink_box(float(alpha), float(violation), float(upper), float(M)))


def shrink_test_soft(alpha: float, g_p: float, g_n: float, bound: float, M: float) -> bool:
    return bool(_shrink_soft(float(alpha), float(g_p), float(g_n), float(bound), float(M)))


class SweepOutcome(enum.Enum):
    CONTINUE = "continue"
    SHRUNK_CONVERGED = "shrunk_converged"
    CONVERGED = "converged"


@dataclass
class SweepState:
    """Active set and violation bookkeeping across sweeps.

    ``full`` is the index set restored after a sweep that satisfies the
    stopping rule on a shrunk active set.
    """
    full: np.ndarray
    eps_stop: float
    active: np.ndarray = None
    M: float = INF
    v0_norm: float | None = None
    vt_norm: float = 0.0
    sweep_count: int = 0

    def __post_init__(self):
        self.full = np.asarray(self.full, dtype=np.int64)
        if self.active is None:
            self.active = self.full.copy()

    def end_sweep(self, vt_norm: float, vmax: float) -> SweepOutcome:
        self.sweep_count += 1
        self.vt_norm = vt_norm
        if self.v0_norm is None:
            self.v0_norm = vt_norm
        if vt_norm == 0.0 or vt_norm < self.eps_stop * self.v0_norm:
            if self.active.size < self.full.size:
                self.active = self.full.copy()
                self.M = INF
                return SweepOutcome.SHRUNK_CONVERGED
            return SweepOutcome.CONVERGED
        self.M = vmax
        return SweepOutcome.CONTINUE


def sweep(state: SweepState, order, visit) -> SweepOutcome:
    """Visit ``order`` once; ``visit(j)`` returns ``(violation, shrink)``."""
    kept = []
    vsum = vmax = 0.0
    for j in order:
        v, shrink = visit(int(j))
        vsum += abs(v)
        vmax = max(vmax, abs(v))
        if not shrink:
            kept.append(j)
    state.active = np.asarray(kept, dtype=np.int64)
    return state.end_sweep(vsum, vmax)


@numba.njit(cache=True, nogil=True)
def _sweep_kernel(indptr, indices, data, sqnorm, var_row, sign, lin, upper, soft,
                  eps, alpha, w, order, M, shrinking):
    vsum = 0.0
    vmax = 0.0
    kept = 0
    for t in range(order.shape[0]):
        j = order[t]
        i = var_row[j]
        lo = indptr[i]
        hi = indptr[i + 1]
        wx = 0.0
        for q in range(lo, hi):
            wx += w[indices[q]] * data[q]
        B = sign[j] * wx + lin[j]
        a = alpha[j]
        if soft[j]:
            if shrinking and _shrink_soft(a, B + eps, B - eps, upper[j], M):
                continue
            new, v = _soft_update(sqnorm[i], B, a, eps, upper[j])
        else:
            if shrinking and _shrink_box(a, B, upper[j], M):
                continue
            new, v = _box_update(sqnorm[i], B, a, upper[j])
        av = abs(v)
        vsum += av
        if av > vmax:
            vmax = av
        order[kept] = j
        kept += 1
        if new != a:
            alpha[j] = new
            delta = (new - a) * sign[j]
            for q in range(lo, hi):
                w[indices[q]] += delta * data[q]
    return kept, vsum, vmax


@dataclass
class DualProblem:
    """Per-variable description of a dual; see the module docstring."""
    X: sp.csr_matrix
    var_row: np.ndarray
    sign: np.ndarray
    lin: np.ndarray
    upper: np.ndarray
    soft: np.ndarray
    eps: float = 0.0
    sqnorm: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.X = sp.csr_matrix(self.X, dtype=np.float64)
        self.var_row = np.ascontiguousarray(self.var_row, dtype=np.int64)
        self.sign = np.ascontiguousarray(self.sign, dtype=np.float64)
        self.lin = np.ascontiguousarray(self.lin, dtype=np.float64)
        self.upper = np.ascontiguousarray(self.upper, dtype=np.float64)
        self.soft = np.ascontiguousarray(self.soft, dtype=np.bool_)
        if self.sqnorm is None:
            self.sqnorm = np.asarray(self.X.multiply(self.X).sum(axis=1)).ravel()
        if np.any(self.upper <= 0):
            raise ValueError("upper bounds must be positive")

    @property
    def size(self) -> int:
        return self.var_row.shape[0]

    def initial_alpha(self) -> np.ndarray:
        """Zeros, except zero-feature rows which get their closed-form optimum.

        A zero row does not enter ``w``, so its coordinate is linear and is
        optimal at a bound or at zero; it is never visited afterwards.
        """
        alpha = np.zeros(self.size)
        zero = self.sqnorm[self.var_row] == 0
        if np.any(zero):
            lin, up, soft = self.lin[zero], self.upper[zero], self.soft[zero]
            box_val = np.where(lin < 0, up, 0.0)
            soft_val = np.where(lin + self.eps < 0, up, np.where(lin - self.eps > 0, -up, 0.0))
            alpha[zero] = np.where(soft, soft_val, box_val)
        return alpha

    def active_vars(self) -> np.ndarray:
        return np.flatnonzero(self.sqnorm[self.var_row] > 0).astype(np.int64)

    def weight(self, alpha) -> np.ndarray:
        coef = self.sign * alpha
        Xv = self.X[self.var_row]
        return np.asarray(Xv.T @ coef).ravel()

    def objective(self, alpha, w=None) -> float:
        if w is None:
            w = self.weight(alpha)
        return float(0.5 * np.dot(w, w) + np.dot(self.lin, alpha)
                     + self.eps * np.abs(alpha[self.soft]).sum())


@dataclass
class DcdResult:
    alpha: np.ndarray
    w: np.ndarray
    sweeps: int
    converged: bool
    solve_time: float
    v0_norm: float
    vt_norm: float


def solve(problem: DualProblem, eps_stop: float = 0.1, shrinking: bool = True,
          max_sweeps: int = 1000, seed=0, engine: str = "numba", callback=None,
          permute: bool = True) -> DcdResult:
    """Randomised dual coordinate descent with shrinking.

    Each sweep visits the active set in a fresh random order (index order
    when ``permute`` is False). The run stops
    when the summed violation of a full sweep drops below ``eps_stop`` times
    that of the first sweep. ``callback(state, alpha, w, solve_time)`` runs
    after every sweep; its cost is excluded from ``solve_time`` (CPU seconds),
    and returning True ends the run early without a warning.
    ``engine="python"`` routes through :func:`sweep` and the scalar step
    functions; it is slow and meant for cross-checking the compiled kernel.
    """
    if eps_stop <= 0:
        raise ValueError("eps_stop must be positive")
    X = problem.X
    alpha = problem.initial_alpha()
    w = problem.weight(alpha)
    state = SweepState(problem.active_vars(), eps_stop)
    rng = np.random.default_rng(seed)
    solve_time = 0.0
    converged = stopped = False

    def visit(j):
        i = problem.var_row[j]
        lo, hi = X.indptr[i], X.indptr[i + 1]
        cols, vals = X.indices[lo:hi], X.data[lo:hi]
        B = problem.sign[j] * float(np.dot(w[cols], vals)) + problem.lin[j]
        a = alpha[j]
        A = problem.sqnorm[i]
        if problem.soft[j]:
            if shrinking and shrink_test_soft(a, B + problem.eps, B - problem.eps, problem.upper[j], state.M):
                return 0.0, True
            new, v = soft_thresh_step(A, B, a, problem.eps, problem.upper[j])
        else:
            if shrinking and shrink_test_box(a, B, problem.upper[j], state.M):
                return 0.0, True
            new, v = box_step(A, B + 1.0, a, problem.upper[j])
        if new != a:
            alpha[j] = new
            w[cols] += (new - a) * problem.sign[j] * vals
        return v, False

    if engine == "numba":
        # an empty sweep compiles (or loads) the kernel outside the timed region
        _sweep_kernel(X.indptr, X.indices, X.data, problem.sqnorm, problem.var_row,
                      problem.sign, problem.lin, problem.upper, problem.soft,
                      problem.eps, alpha, w, state.active[:0].copy(), state.M, shrinking)
    while state.sweep_count < max_sweeps:
        t0 = time.process_time()
        order = rng.permutation(state.active) if permute else state.active.copy()
        if engine == "numba":
            kept, vsum, vmax = _sweep_kernel(
                X.indptr, X.indices, X.data, problem.sqnorm, problem.var_row,
                problem.sign, problem.lin, problem.upper, problem.soft,
                problem.eps, alpha, w, order, state.M, shrinking)
            state.active = order[:kept].copy()
            outcome = state.end_sweep(vsum, vmax)
        elif engine == "python":
            outcome = sweep(state, order, visit)
        else:
            raise ValueError(f"unknown engine {engine!r}")
        solve_time += time.process_time() - t0
        if outcome is SweepOutcome.CONVERGED:
            converged = True
        if callback is not None and callback(state, alpha, w, solve_time) is True:
            stopped = True
        if converged or stopped:
            break
    if not (converged or stopped):
        warnings.warn(f"reached max_sweeps={max_sweeps} before the stopping condition",
                      ConvergenceWarning, stacklevel=2)
    return DcdResult(alpha, w, state.sweep_count, converged, solve_time,
                     state.v0_norm or 0.0, state.vt_norm)
