"""Gaussian-process regression with an anisotropic squared-exponential kernel.

Inputs are expected in the unit cube; targets are standardized inside
:func:`fit` and mapped back by :func:`predict`. The process variance is
profiled out of the likelihood, so only the length scales are searched.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize

from . import kernels

LOG_LS_BOUNDS = (np.log(1e-3), np.log(1e2))
NUGGET_START = 1e-8
NUGGET_MAX = 1e-4
DEDUP_TOL = 1e-10


class GpFitError(RuntimeError):
    """Covariance could not be factorized, or too little distinct data."""


@dataclass(frozen=True)
class GpTrainingSet:
    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        y = np.asarray(self.targets, dtype=float).ravel()
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"{X.shape[0]} inputs but {y.shape[0]} targets")
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
            raise ValueError("training data must be finite")
        object.__setattr__(self, "inputs", X)
        object.__setattr__(self, "targets", y)

    def __len__(self):
        return self.targets.shape[0]

    def deduplicated(self, tol=DEDUP_TOL):
        """Drop inputs within ``tol`` (max-norm) of an earlier input; first occurrence wins."""
        X = self.inputs
        n = X.shape[0]
        if n < 2:
            return self
        close = np.zeros((n, n), dtype=bool)
        for i in range(n):
            close[i, :i] = np.max(np.abs(X[:i] - X[i]), axis=1) <= tol
        keep = np.ones(n, dtype=bool)
        for i in range(1, n):
            if np.any(close[i, :i] & keep[:i]):
                keep[i] = False
        if keep.all():
            return self
        return GpTrainingSet(X[keep], self.targets[keep])

    @staticmethod
    def concat(*sets):
        sets = [s for s in sets if s is not None and len(s)]
        return GpTrainingSet(
            np.vstack([s.inputs for s in sets]), np.concatenate([s.targets for s in sets])
        )


@dataclass(frozen=True, eq=False)
class GpModel:
    training: GpTrainingSet
    length_scales: np.ndarray
    signal_variance: float  # in standardized target units
    nugget: float
    factored_covariance: np.ndarray  # lower Cholesky factor of C + nugget*I
    alpha: np.ndarray
    y_mean: float
    y_std: float
    neg_log_likelihood: float = float("nan")
    info: dict = field(default_factory=dict)

    @property
    def prior_std(self):
        """Predictive std far from all data, in target units."""
        return self.y_std * np.sqrt(self.signal_variance)

    def params_fingerprint(self):
        return (
            tuple(np.round(self.length_scales, 15)),
            float(self.signal_variance),
            float(self.nugget),
            len(self.training),
        )

    def to_json(self):
        return json.dumps(
            {
                "length_scales": self.length_scales.tolist(),
                "signal_variance": self.signal_variance,
                "nugget": self.nugget,
                "y_mean": self.y_mean,
                "y_std": self.y_std,
                "neg_log_likelihood": self.neg_log_likelihood,
                "inputs": self.training.inputs.tolist(),
                "targets": self.training.targets.tolist(),
            }
        )


def _factor(C, nugget):
    """Cholesky of ``C + nugget*I`` escalating the nugget x10 up to NUGGET_MAX."""
    n = C.shape[0]
    while nugget <= NUGGET_MAX * (1 + 1e-9):
        try:
            L = cholesky(C + nugget * np.eye(n), lower=True, check_finite=False)
            if np.all(np.diag(L) > 0):
                return L, nugget
        except LinAlgError:
            pass
        nugget *= 10.0
    return None, nugget


def neg_log_likelihood(log_ls, X, y, nugget=NUGGET_START, with_grad=True):
    """Profile negative log marginal likelihood over log length scales.

    The process variance is replaced by its closed-form estimate
    ``y^T R^-1 y / n``; additive constants are dropped.
    """
    n = X.shape[0]
    inv_ls2 = np.exp(-2.0 * np.asarray(log_ls, dtype=float))
    C = kernels.sq_exp_corr(X, X, inv_ls2)
    L, _ = _factor(C, nugget)
    if L is None:
        return (1e10, np.zeros_like(log_ls)) if with_grad else 1e10
    a = cho_solve((L, True), y, check_finite=False)
    quad = max(float(y @ a), 1e-300)
    value = 0.5 * n * np.log(quad / n) + np.sum(np.log(np.diag(L)))
    if not with_grad:
        return value
    Rinv = cho_solve((L, True), np.eye(n), check_finite=False)
    W = 0.5 * (Rinv - (n / quad) * np.outer(a, a))
    grad = kernels.lml_grad_terms(X, C, W, inv_ls2)
    return value, grad


def _build(data, log_ls, nugget, signal_variance, y_mean, y_std, ytil, nll=float("nan"), info=None):
    X = data.inputs
    inv_ls2 = np.exp(-2.0 * log_ls)
    C = kernels.sq_exp_corr(X, X, inv_ls2)
    L, used = _factor(C, nugget)
    if L is None:
        raise GpFitError(f"covariance not positive definite even with nugget {NUGGET_MAX:g}")
    a = cho_solve((L, True), ytil, check_finite=False)
    if signal_variance is None:
        signal_variance = max(float(ytil @ a) / X.shape[0], 1e-12)
    return GpModel(
        training=data,
        length_scales=np.exp(log_ls),
        signal_variance=float(signal_variance),
        nugget=float(used),
        factored_covariance=L,
        alpha=a,
        y_mean=float(y_mean),
        y_std=float(y_std),
        neg_log_likelihood=float(nll),
        info=dict(info or {}),
    )


def fit(
    data,
    *,
    length_scales=None,
    signal_variance=None,
    nugget=None,
    restarts=5,
    seed=0,
    init_length_scales=None,
    standardize=True,
):
    """Fit a GP by maximizing the profile likelihood over length scales.

    With ``length_scales`` given, no search is done. ``init_length_scales``
    replaces the first start of the multi-start search (warm start).
    """
    data = data.deduplicated()
    n = len(data)
    if n < 2:
        raise GpFitError(f"need at least 2 distinct training inputs, got {n}")
    X, y = data.inputs, data.targets
    d = X.shape[1]
    nugget = NUGGET_START if nugget is None else float(nugget)

    if standardize:
        y_mean = float(np.mean(y))
        y_std = float(np.std(y))
    else:
        y_mean, y_std = 0.0, 1.0
    if y_std <= 1e-12 * max(1.0, abs(y_mean)):
        # constant targets: prediction is the constant everywhere
        return _build(
            data, np.full(d, np.log(0.5)), nugget, 1e-12, y_mean, 1.0, np.zeros(n),
            info={"constant": True},
        )
    ytil = (y - y_mean) / y_std

    if length_scales is not None:
        log_ls = np.log(np.broadcast_to(np.asarray(length_scales, dtype=float), (d,)).copy())
        nll = neg_log_likelihood(log_ls, X, ytil, nugget, with_grad=False)
        return _build(data, log_ls, nugget, signal_variance, y_mean, y_std, ytil, nll)

    rng = np.random.default_rng(seed)
    lo, hi = LOG_LS_BOUNDS
    starts = [np.full(d, np.log(0.5))]
    starts += [rng.uniform(np.log(0.05), np.log(5.0), d) for _ in range(max(restarts, 1) - 1)]
    if init_length_scales is not None:
        starts[0] = np.clip(np.log(np.asarray(init_length_scales, dtype=float)), lo, hi)

    best_x, best_f = None, np.inf
    for x0 in starts:
        res = minimize(
            neg_log_likelihood,
            x0,
            args=(X, ytil, nugget),
            jac=True,
            method="L-BFGS-B",
            bounds=[(lo, hi)] * d,
            options={"maxiter": 200},
        )
        if np.isfinite(res.fun) and res.fun < best_f:
            best_x, best_f = res.x, float(res.fun)
    if best_x is None:
        raise GpFitError("likelihood search failed from every start")
    return _build(data, best_x, nugget, signal_variance, y_mean, y_std, ytil, best_f,
                  info={"restarts": len(starts)})


def predict(model, x):
    """Predictive mean and standard deviation in target units.

    ``x`` may be a single point (returns floats) or an ``(n, d)`` matrix.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    Xq = np.atleast_2d(x)
    inv_ls2 = 1.0 / model.length_scales**2
    r = kernels.sq_exp_corr(Xq, model.training.inputs, inv_ls2)
    mean = model.y_mean + model.y_std * (r @ model.alpha)
    v = solve_triangular(model.factored_covariance, r.T, lower=True, check_finite=False)
    var = model.signal_variance * np.maximum(1.0 - np.sum(v * v, axis=0), 0.0)
    std = model.y_std * np.sqrt(var)
    if single:
        return float(mean[0]), float(std[0])
    return mean, std
