"""Dual solvers for the real C-SVM and epsilon-SVR.

Both duals use the box ``[0, C/N]`` on every multiplier (note: C/N, not C as
in most SVM libraries).  Solutions are found by SMO; a grid-search oracle for
tiny problems is provided to check them independently.
"""

from __future__ import annotations

import itertools
import threading
import warnings
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._smo import smo_solve

__all__ = [
    "SvrParams",
    "SvcParams",
    "SvrModel",
    "SvcModel",
    "OracleSolution",
    "ConvergenceWarning",
    "SingleClassError",
    "solve_svr_dual",
    "solve_svc_dual",
    "solve_dual_bruteforce",
    "compute_bias_svr",
    "compute_bias_svc",
    "svr_dual_objective",
    "svc_dual_objective",
    "count_solves",
]


class ConvergenceWarning(UserWarning):
    pass


class SingleClassError(ValueError):
    pass


_counter_lock = threading.Lock()
_active_counters: list = []


@contextmanager
def count_solves():
    """Count dual solver invocations made inside the block.

    >>> with count_solves() as calls:
    ...     pass
    >>> calls["svc"], calls["svr"]
    (0, 0)
    """
    calls = {"svc": 0, "svr": 0}
    with _counter_lock:
        _active_counters.append(calls)
    try:
        yield calls
    finally:
        with _counter_lock:
            _active_counters.remove(calls)


def _record_solve(kind):
    with _counter_lock:
        for calls in _active_counters:
            calls[kind] += 1


@dataclass(frozen=True)
class SvrParams:
    C: float
    epsilon: float = 0.1
    kkt_tol: float = 1e-3
    max_passes: Optional[int] = None

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError(f"C must be positive, got {self.C}")
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon}")
        if not self.kkt_tol > 0:
            raise ValueError(f"kkt_tol must be positive, got {self.kkt_tol}")
        if self.max_passes is not None and self.max_passes < 1:
            raise ValueError("max_passes must be at least 1")

    def to_dict(self):
        return {"C": self.C, "epsilon": self.epsilon, "kkt_tol": self.kkt_tol, "max_passes": self.max_passes}


@dataclass(frozen=True)
class SvcParams:
    C: float
    kkt_tol: float = 1e-3
    max_passes: Optional[int] = None

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError(f"C must be positive, got {self.C}")
        if not self.kkt_tol > 0:
            raise ValueError(f"kkt_tol must be positive, got {self.kkt_tol}")
        if self.max_passes is not None and self.max_passes < 1:
            raise ValueError("max_passes must be at least 1")

    def to_dict(self):
        return {"C": self.C, "kkt_tol": self.kkt_tol, "max_passes": self.max_passes}


@dataclass(frozen=True, eq=False)
class SvrModel:
    """Solution of the epsilon-SVR dual.

    ``beta[n]`` is the difference of the two multipliers of sample n; the
    fitted function is ``f(x) = sum_n beta[n] K(x_n, x) + bias``.
    """

    beta: np.ndarray
    bias: float
    objective: float
    params: SvrParams
    converged: bool = True
    n_iter: int = 0
    sv_indices: np.ndarray = field(init=False)

    def __post_init__(self):
        beta = np.array(self.beta, dtype=float)
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        sv = np.flatnonzero(beta != 0.0)
        sv.setflags(write=False)
        object.__setattr__(self, "sv_indices", sv)

    @property
    def upper(self):
        return self.params.C / len(self.beta)

    def decision(self, cross):
        """Evaluate on a cross-kernel matrix ``cross[m, n] = K(x_n, q_m)``."""
        return np.asarray(cross) @ self.beta + self.bias

    def to_dict(self):
        return {
            "beta": self.beta.tolist(),
            "bias": self.bias,
            "sv_indices": self.sv_indices.tolist(),
            "objective": self.objective,
            "converged": self.converged,
            "n_iter": self.n_iter,
            "params": self.params.to_dict(),
        }

    @classmethod
    def from_dict(cls, obj):
        return cls(
            beta=np.asarray(obj["beta"], dtype=float),
            bias=float(obj["bias"]),
            objective=float(obj["objective"]),
            params=SvrParams(**obj["params"]),
            converged=bool(obj.get("converged", True)),
            n_iter=int(obj.get("n_iter", 0)),
        )


@dataclass(frozen=True, eq=False)
class SvcModel:
    """Solution of the C-SVM dual; ``f(x) = sum_n alpha[n] d_n K(x_n, x) + bias``."""

    alpha: np.ndarray
    labels: np.ndarray
    bias: float
    objective: float
    params: SvcParams
    converged: bool = True
    n_iter: int = 0
    sv_indices: np.ndarray = field(init=False)

    def __post_init__(self):
        alpha = np.array(self.alpha, dtype=float)
        labels = np.array(self.labels, dtype=float)
        alpha.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "labels", labels)
        sv = np.flatnonzero(alpha != 0.0)
        sv.setflags(write=False)
        object.__setattr__(self, "sv_indices", sv)

    @property
    def upper(self):
        return self.params.C / len(self.alpha)

    @property
    def coef(self):
        return self.alpha * self.labels

    def decision(self, cross):
        return np.asarray(cross) @ self.coef + self.bias

    def predict(self, cross):
        return np.where(self.decision(cross) >= 0.0, 1.0, -1.0)

    def to_dict(self):
        return {
            "alpha": self.alpha.tolist(),
            "labels": self.labels.tolist(),
            "bias": self.bias,
            "sv_indices": self.sv_indices.tolist(),
            "objective": self.objective,
            "converged": self.converged,
            "n_iter": self.n_iter,
            "params": self.params.to_dict(),
        }

    @classmethod
    def from_dict(cls, obj):
        return cls(
            alpha=np.asarray(obj["alpha"], dtype=float),
            labels=np.asarray(obj["labels"], dtype=float),
            bias=float(obj["bias"]),
            objective=float(obj["objective"]),
            params=SvcParams(**obj["params"]),
            converged=bool(obj.get("converged", True)),
            n_iter=int(obj.get("n_iter", 0)),
        )


def _check_gram(gram):
    g = np.asarray(gram, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] == 0:
        raise ValueError(f"Gram must be a nonempty square matrix, got shape {g.shape}")
    if not np.all(np.isfinite(g)):
        raise ValueError("Gram has non-finite entries")
    scale = max(float(np.max(np.abs(g))), 1.0)
    if np.max(np.abs(g - g.T)) > 1e-10 * scale:
        raise ValueError("Gram matrix is not symmetric")
    return np.ascontiguousarray(g)


def _max_iter(params, n_vars, n):
    passes = params.max_passes if params.max_passes is not None else 10 * n
    return int(passes) * n_vars


def svr_dual_objective(gram, targets, beta, epsilon):
    """Dual value ``-1/2 b^T K b - eps * |b|_1 + d^T b`` (maximisation form)."""
    beta = np.asarray(beta, dtype=float)
    return float(-0.5 * beta @ gram @ beta - epsilon * np.sum(np.abs(beta)) + np.asarray(targets) @ beta)


def svc_dual_objective(gram, labels, alpha):
    coef = np.asarray(alpha) * np.asarray(labels)
    return float(np.sum(alpha) - 0.5 * coef @ gram @ coef)


def _is_free(values, upper):
    mag = np.abs(values)
    return (mag > 0.0) & (mag < upper)


def _interval_midpoint(lower, upper_bounds, tol, what):
    lo = max(lower) if lower else None
    hi = min(upper_bounds) if upper_bounds else None
    if lo is None and hi is None:
        raise ValueError(f"no KKT information to determine the {what} bias")
    if lo is None:
        return hi
    if hi is None:
        return lo
    if lo > hi + tol:
        raise ValueError(f"inconsistent dual solution: feasible {what} bias interval [{lo:.6g}, {hi:.6g}] is empty")
    return 0.5 * (lo + hi)


def compute_bias_svr(gram, targets, beta, params):
    """Bias of the SVR from the KKT conditions.

    Averages ``d_m - (K beta)_m - eps * sign(beta_m)`` over unbounded
    support vectors; with none, returns the midpoint of the bias interval
    allowed by every KKT inequality.
    """
    g = np.asarray(gram, dtype=float)
    d = np.asarray(targets, dtype=float)
    beta = np.asarray(beta, dtype=float)
    upper = params.C / len(beta)
    resid = d - g @ beta
    free = _is_free(beta, upper)
    if np.any(free):
        return float(np.mean(resid[free] - params.epsilon * np.sign(beta[free])))
    eps = params.epsilon
    lower, upper_bounds = [], []
    for r, b in zip(resid, beta):
        if b == 0.0:
            lower.append(r - eps)
            upper_bounds.append(r + eps)
        elif b > 0.0:
            upper_bounds.append(r - eps)
        else:
            lower.append(r + eps)
    return float(_interval_midpoint(lower, upper_bounds, params.kkt_tol, "SVR"))


def compute_bias_svc(gram, labels, alpha, params):
    """Bias of the C-SVM: average of ``d_m - f_m`` over unbounded SVs, else interval midpoint."""
    g = np.asarray(gram, dtype=float)
    d = np.asarray(labels, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    upper = params.C / len(alpha)
    resid = d - g @ (alpha * d)
    free = _is_free(alpha, upper)
    if np.any(free):
        return float(np.mean(resid[free]))
    lower, upper_bounds = [], []
    for r, a, lab in zip(resid, alpha, d):
        at_zero = a == 0.0
        if (lab > 0) == at_zero:
            lower.append(r)
        else:
            upper_bounds.append(r)
    return float(_interval_midpoint(lower, upper_bounds, params.kkt_tol, "SVC"))


def _finish(converged, n_iter, worst_rise, scale, what, debug):
    if debug and worst_rise > 1e-9 * max(scale, 1.0):
        raise AssertionError(f"{what} dual objective decreased by {worst_rise:.3g} during SMO")
    if not converged:
        warnings.warn(f"{what} SMO stopped after {n_iter} iterations without reaching KKT tolerance",
                      ConvergenceWarning, stacklevel=3)


def _canonical_sign(values):
    """+1 or -1 such that ``sign * values`` has a positive first nonzero entry."""
    nz = np.flatnonzero(values)
    return -1.0 if nz.size and values[nz[0]] < 0 else 1.0


def solve_svr_dual(gram, targets, params, *, debug=False):
    """Maximise the epsilon-SVR dual over ``|beta_n| <= C/N``, ``sum beta = 0``.

    Non-convergence returns the last (best) iterate with ``converged=False``
    and a :class:`ConvergenceWarning`.  ``debug=True`` tracks the objective
    and raises if any SMO step made it worse.
    """
    g = _check_gram(gram)
    d = np.asarray(targets, dtype=float)
    n = g.shape[0]
    if d.shape != (n,):
        raise ValueError(f"expected {n} targets, got shape {d.shape}")
    if not np.all(np.isfinite(d)):
        raise ValueError("targets contain NaN or Inf")
    _record_solve("svr")

    # solve in a sign-canonical frame so that negated targets give exactly negated solutions
    sign = _canonical_sign(d)
    d = sign * d
    idx = np.concatenate([np.arange(n), np.arange(n)]).astype(np.int64)
    y = np.concatenate([np.ones(n), -np.ones(n)])
    p = np.concatenate([params.epsilon - d, params.epsilon + d])
    upper = params.C / n
    alpha, _, n_iter, converged, rise = smo_solve(
        g, idx, y, p, upper, params.kkt_tol, _max_iter(params, 2 * n, n), debug
    )
    # a_hat holds the first N entries, a the last N
    beta = alpha[:n] - alpha[n:]
    objective = -0.5 * beta @ g @ beta - params.epsilon * np.sum(alpha) + d @ beta
    _finish(converged, n_iter, rise, abs(objective), "SVR", debug)
    bias = compute_bias_svr(g, d, beta, _loose(params, converged))
    return SvrModel(beta=sign * beta, bias=sign * bias, objective=float(objective), params=params,
                    converged=bool(converged), n_iter=int(n_iter))


def _loose(params, converged):
    # a non-converged iterate may violate KKT by more than kkt_tol
    if converged:
        return params
    return type(params)(**{**params.to_dict(), "kkt_tol": np.inf})


def solve_svc_dual(gram, labels, params, *, debug=False):
    """Maximise the C-SVM dual over ``0 <= alpha_n <= C/N``, ``sum alpha_n d_n = 0``."""
    g = _check_gram(gram)
    d = np.asarray(labels, dtype=float)
    n = g.shape[0]
    if d.shape != (n,):
        raise ValueError(f"expected {n} labels, got shape {d.shape}")
    if not np.all(np.isin(d, (-1.0, 1.0))):
        raise ValueError("labels must be +1 or -1")
    if np.all(d == d[0]):
        raise SingleClassError("single-class input")
    _record_solve("svc")

    sign = _canonical_sign(d)
    d = sign * d
    idx = np.arange(n, dtype=np.int64)
    p = -np.ones(n)
    alpha, _, n_iter, converged, rise = smo_solve(
        g, idx, d, p, params.C / n, params.kkt_tol, _max_iter(params, n, n), debug
    )
    objective = svc_dual_objective(g, d, alpha)
    _finish(converged, n_iter, rise, abs(objective), "SVC", debug)
    bias = compute_bias_svc(g, d, alpha, _loose(params, converged))
    return SvcModel(alpha=alpha, labels=sign * d, bias=sign * bias, objective=objective, params=params,
                    converged=bool(converged), n_iter=int(n_iter))


# ---------------------------------------------------------------------------
# exhaustive oracle

@dataclass(frozen=True)
class OracleSolution:
    model: object
    grid_bound: float
    spacing: float


def _primal_bias(resid, loss):
    """Midpoint of argmin_c sum_n loss(resid_n - c) for a convex piecewise-linear loss.

    ``loss`` maps candidate biases (shape (m,)) to total loss; the breakpoints
    are supplied in ``resid``.
    """
    candidates = np.unique(resid)
    values = loss(candidates)
    best = np.min(values)
    tol = 1e-12 * max(1.0, abs(best)) + 1e-12
    near = candidates[values <= best + tol]
    return float(0.5 * (near.min() + near.max()))


def _grid_points(lo, hi, res):
    axes = [np.linspace(a, b, res + 1) for a, b in zip(lo, hi)]
    return axes


def _iter_grid(axes, chunk_dims=3):
    """Yield grid points in chunks of shape (m, len(axes))."""
    k = len(axes)
    head, tail = axes[: max(0, k - chunk_dims)], axes[max(0, k - chunk_dims):]
    tail_mesh = np.stack(np.meshgrid(*tail, indexing="ij"), axis=-1).reshape(-1, len(tail))
    for prefix in itertools.product(*head):
        if prefix:
            pre = np.broadcast_to(np.asarray(prefix), (tail_mesh.shape[0], len(prefix)))
            yield np.hstack([pre, tail_mesh])
        else:
            yield tail_mesh


def solve_dual_bruteforce(gram, values, params, grid_resolution=50, levels=12):
    """Grid-search the dual of a small SVR or SVC problem.

    ``params`` selects the problem: :class:`SvrParams` treats ``values`` as
    regression targets, :class:`SvcParams` as +/-1 labels.  The equality
    constraint is eliminated by solving for the last variable; the feasible
    box is gridded uniformly and then repeatedly re-gridded around the best
    point.  The bias is read off by minimising the primal loss over the
    offset, so nothing is shared with the SMO path.
    """
    g = np.asarray(gram, dtype=float)
    v = np.asarray(values, dtype=float)
    n = g.shape[0]
    if n > 6:
        raise ValueError(f"brute-force oracle supports n <= 6, got {n}")
    if grid_resolution < 50:
        raise ValueError("grid_resolution must be at least 50")
    upper = params.C / n
    regression = isinstance(params, SvrParams)
    if not regression and np.all(v == v[0]):
        raise SingleClassError("single-class input")

    if regression:
        eps = params.epsilon

        def full(free):
            return np.hstack([free, -free.sum(axis=1, keepdims=True)])

        def objective(x):
            return -0.5 * np.einsum("mi,ij,mj->m", x, g, x) - eps * np.abs(x).sum(axis=1) + x @ v

        lo0, hi0 = -upper, upper
        last = lambda x: x[:, -1]
    else:
        def full(free):
            tail = -v[-1] * (free @ v[:-1])
            return np.hstack([free, tail[:, None]])

        def objective(x):
            c = x * v
            return x.sum(axis=1) - 0.5 * np.einsum("mi,ij,mj->m", c, g, c)

        lo0, hi0 = 0.0, upper
        last = lambda x: x[:, -1]

    if n == 1:
        best_x = np.zeros(1)
        spacing = 0.0
    else:
        lo = np.full(n - 1, lo0)
        hi = np.full(n - 1, hi0)
        best_x, best_val = None, -np.inf
        spacing = (hi0 - lo0) / grid_resolution
        for _ in range(levels):
            axes = _grid_points(lo, hi, grid_resolution)
            for chunk in _iter_grid(axes):
                x = full(chunk)
                tail = last(x)
                ok = (tail >= lo0 - 1e-15) & (tail <= hi0 + 1e-15)
                if not np.any(ok):
                    continue
                vals = np.where(ok, objective(x), -np.inf)
                k = int(np.argmax(vals))
                if vals[k] > best_val:
                    best_val, best_x = vals[k], x[k].copy()
            spacing = float(np.max(hi - lo)) / grid_resolution
            if spacing <= 1e-13 * max(upper, 1.0):
                break
            centre = best_x[:-1]
            lo = np.maximum(centre - 3 * spacing, lo0)
            hi = np.minimum(centre + 3 * spacing, hi0)
        best_x = np.clip(best_x, lo0, hi0)

    lip = 2.0 * (np.max(np.abs(g)) * n * upper + (params.epsilon if regression else 0.0) + np.max(np.abs(v)) + 1.0)
    bound = float(max(n - 1, 0) * spacing * lip)

    if regression:
        resid = v - g @ best_x
        eps = params.epsilon
        brk = np.concatenate([resid - eps, resid + eps])
        bias = _primal_bias(brk, lambda c: np.maximum(0.0, np.abs(resid[None, :] - c[:, None]) - eps).sum(axis=1))
        model = SvrModel(beta=best_x, bias=bias, objective=float(objective(best_x[None, :])[0]), params=params)
    else:
        f = g @ (best_x * v)
        brk = v - f
        bias = _primal_bias(brk, lambda c: np.maximum(0.0, 1.0 - v[None, :] * (f[None, :] + c[:, None])).sum(axis=1))
        model = SvcModel(alpha=best_x, labels=v, bias=bias, objective=float(objective(best_x[None, :])[0]),
                         params=params)
    return OracleSolution(model=model, grid_bound=bound, spacing=float(spacing))
