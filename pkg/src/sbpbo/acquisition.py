"""Adaptive acquisition and the search-bias penalty for heterogeneous objectives.

All scores are m-vectors to be minimized jointly. Population-level
statistics (maxima, extrema) are taken over the population being scored.
"""

from dataclasses import dataclass

import numpy as np

FLOOR = 1e-12


@dataclass(frozen=True)
class AcquisitionContext:
    fe_current: int
    fe_max: int
    itrn: int
    weights: np.ndarray
    mu_max: np.ndarray
    sigma_max: np.ndarray
    mu_hi: np.ndarray
    mu_lo: np.ndarray

    @classmethod
    def from_population(cls, mu, sigma, ratios, fe_current, fe_max, itrn):
        """Collect the per-objective statistics of a scored population ``(n, m)``."""
        mu = np.atleast_2d(mu)
        sigma = np.atleast_2d(sigma)
        if itrn < 1:
            raise ValueError("iteration counter starts at 1")
        return cls(
            fe_current=fe_current,
            fe_max=fe_max,
            itrn=itrn,
            weights=objective_weights(ratios),
            mu_max=np.max(mu, axis=0),
            sigma_max=np.max(sigma, axis=0),
            mu_hi=np.max(mu, axis=0),
            mu_lo=np.min(mu, axis=0),
        )

    @property
    def alpha(self):
        return adaptation_alpha(self.fe_current, self.fe_max)


def objective_weights(ratios):
    r = np.asarray(ratios, dtype=float)
    return r / np.sum(r)


def adaptation_alpha(fe, fe_max):
    """Cosine schedule from 0 (no evaluations used) to 1 (budget spent)."""
    if fe_max <= 0:
        raise ValueError("fe_max must be positive")
    return -0.5 * np.cos(np.pi * fe / fe_max) + 0.5


def _floored(v):
    v = np.asarray(v, dtype=float)
    return np.where(np.abs(v) < FLOOR, np.where(v < 0, -FLOOR, FLOOR), v)


def af_adaptive(mu, sigma, ctx):
    a = ctx.alpha
    return (1.0 - a) * (np.asarray(mu) / _floored(ctx.mu_max)) + a * (
        np.asarray(sigma) / _floored(ctx.sigma_max)
    )


def normalize_means(mu, ctx):
    """Map predicted means to [0, 1] by population extrema; flat components map to 0."""
    span = ctx.mu_hi - ctx.mu_lo
    flat = span <= 0
    out = (np.asarray(mu, dtype=float) - ctx.mu_lo) / np.where(flat, 1.0, span)
    return np.where(flat, 0.0, out)


def penalty_rate(weights, itrn):
    return 1.0 / (np.asarray(weights, dtype=float) * itrn + 1.0)


def sbp_penalty(mu_bar, itrn, weights):
    """Per-objective penalty ``1 - lam * exp(-lam * mu_bar)`` with ``lam = 1/(w*itrn + 1)``."""
    lam = penalty_rate(weights, itrn)
    return 1.0 - lam * np.exp(-lam * np.asarray(mu_bar, dtype=float))


def af_sbp(mu, sigma, ctx, penalize=True):
    """Penalized acquisition; with ``penalize=False`` this is plain :func:`af_adaptive`."""
    base = af_adaptive(mu, sigma, ctx)
    if not penalize:
        return base
    return base * sbp_penalty(normalize_means(mu, ctx), ctx.itrn, ctx.weights)
