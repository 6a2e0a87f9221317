"""Evolutionary machinery: sampling, variation operators, reference vectors,
angle-penalized-distance selection and a small single-objective GA.

Decision vectors handled here live in the unit cube unless bounds are
passed explicitly.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .gp import GpTrainingSet
from .problem import evaluate_cheap_batch

ETA_C = 20.0
ETA_M = 20.0
APD_ALPHA = 2.0


# --------------------------------------------------------------------------
# sampling and variation
# --------------------------------------------------------------------------

def latin_hypercube(n, d, lower=None, upper=None, seed=None):
    """``n`` stratified points: each dimension has one point per equal-width bin."""
    U = qmc.LatinHypercube(d=d, rng=np.random.default_rng(seed)).random(n)
    if lower is None:
        return U
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    return lower + U * (upper - lower)


def sbx_beta(u, eta=ETA_C):
    """Spread factor for a uniform draw ``u`` in [0, 1)."""
    u = np.asarray(u, dtype=float)
    return np.where(
        u <= 0.5,
        (2.0 * u) ** (1.0 / (eta + 1.0)),
        (2.0 - 2.0 * u) ** (-1.0 / (eta + 1.0)),
    )


def sbx_children(p1, p2, beta):
    c1 = 0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2)
    c2 = 0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2)
    return c1, c2


def sbx_crossover(p1, p2, rng, eta_c=ETA_C, prob=1.0, lower=0.0, upper=1.0):
    """Simulated binary crossover on rows of ``p1`` and ``p2`` (1-D or 2-D).

    Each variable is exchanged with probability 0.5 once the pair is
    selected for crossover (probability ``prob``); children are clipped.
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    shape = np.broadcast_shapes(p1.shape, p2.shape)
    beta = sbx_beta(rng.random(shape), eta_c)
    beta = np.where(rng.random(shape) < 0.5, beta, 1.0)
    if p1.ndim == 2:
        pair_on = rng.random((shape[0], 1)) < prob
    else:
        pair_on = rng.random() < prob
    beta = np.where(pair_on, beta, 1.0)
    c1, c2 = sbx_children(p1, p2, beta)
    return np.clip(c1, lower, upper), np.clip(c2, lower, upper)


def pm_delta(u, x, lower, upper, eta=ETA_M):
    """Bounded polynomial-mutation step for draw ``u``, as a fraction of the range."""
    span = upper - lower
    d1 = (x - lower) / span
    d2 = (upper - x) / span
    p = 1.0 / (eta + 1.0)
    lo = (2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1) ** (eta + 1.0)) ** p - 1.0
    hi_base = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2) ** (eta + 1.0)
    hi = 1.0 - np.maximum(hi_base, 0.0) ** p
    return np.where(u <= 0.5, lo, hi)


def polynomial_mutation(x, rng, eta_m=ETA_M, prob=None, lower=0.0, upper=1.0):
    """Mutate each variable with probability ``prob`` (default ``1/d``)."""
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    prob = 1.0 / d if prob is None else prob
    lower = np.broadcast_to(np.asarray(lower, dtype=float), x.shape)
    upper = np.broadcast_to(np.asarray(upper, dtype=float), x.shape)
    u = rng.random(x.shape)
    on = rng.random(x.shape) < prob
    step = pm_delta(u, x, lower, upper, eta_m) * (upper - lower)
    return np.clip(np.where(on, x + step, x), lower, upper)


def make_offspring(parents, rng, n_offspring=None, lower=0.0, upper=1.0):
    """Random mating, SBX, then polynomial mutation."""
    n = parents.shape[0]
    n_offspring = n if n_offspring is None else n_offspring
    half = (n_offspring + 1) // 2
    i1 = rng.integers(0, n, half)
    i2 = rng.integers(0, n, half)
    c1, c2 = sbx_crossover(parents[i1], parents[i2], rng, lower=lower, upper=upper)
    kids = np.vstack([c1, c2])[:n_offspring]
    return polynomial_mutation(kids, rng, lower=lower, upper=upper)


# --------------------------------------------------------------------------
# reference vectors and APD selection
# --------------------------------------------------------------------------

def simplex_lattice(h, m):
    """Das-Dennis points: all compositions of ``h`` into ``m`` parts, divided by ``h``."""
    if m == 1:
        return np.ones((1, 1))
    pts = []

    def rec(prefix, left, slots):
        if slots == 1:
            pts.append(prefix + [left])
            return
        for v in range(left + 1):
            rec(prefix + [v], left - v, slots - 1)

    rec([], h, m)
    return np.asarray(pts, dtype=float) / h


def lattice_layout(m, target=100):
    """Lattice divisions: one layer reaching ``target`` points for m <= 7, (3, 2) layers above."""
    if m >= 8:
        return (3, 2)
    h = 1
    while math.comb(h + m - 1, m - 1) < target:
        h += 1
    return (h,)


def _unit(V):
    return V / np.linalg.norm(V, axis=1, keepdims=True)


@dataclass(frozen=True)
class ReferenceVectorSet:
    base_vectors: np.ndarray
    adapted_vectors: np.ndarray

    @classmethod
    def create(cls, m, layout=None):
        layout = lattice_layout(m) if layout is None else layout
        W = simplex_lattice(layout[0], m)
        if len(layout) > 1:
            inner = simplex_lattice(layout[1], m) / 2.0 + 1.0 / (2.0 * m)
            W = np.vstack([W, inner])
        V = _unit(W)
        return cls(V, V.copy())

    def __len__(self):
        return self.base_vectors.shape[0]

    def adapt(self, F):
        """Rescale the base vectors by the per-objective range of ``F``."""
        span = np.max(F, axis=0) - np.min(F, axis=0)
        span = np.where(span > 1e-12, span, 1e-12)
        return ReferenceVectorSet(self.base_vectors, _unit(self.base_vectors * span))

    def neighbour_angles(self):
        """Smallest angle between each vector and any other vector."""
        V = self.adapted_vectors
        if V.shape[0] < 2:
            return np.full(V.shape[0], np.pi / 2)
        cos = np.clip(V @ V.T, -1.0, 1.0)
        np.fill_diagonal(cos, -np.inf)
        return np.arccos(np.clip(np.max(cos, axis=1), -1.0, 1.0))


def apd_values(F, refs, progress):
    """Assignment and APD of each row of ``F`` (after ideal-point translation).

    Returns ``(assigned_vector, apd, theta)``.
    """
    F = np.asarray(F, dtype=float)
    m = F.shape[1]
    Ft = F - np.min(F, axis=0)
    norm = np.linalg.norm(Ft, axis=1)
    safe = np.where(norm > 0, norm, 1.0)
    cos = np.clip((Ft @ refs.adapted_vectors.T) / safe[:, None], -1.0, 1.0)
    cos[norm == 0] = 1.0
    assign = np.argmax(cos, axis=1)
    theta = np.arccos(cos[np.arange(F.shape[0]), assign])
    gamma = refs.neighbour_angles()[assign]
    gamma = np.where(gamma > 0, gamma, 1e-12)
    penalty = m * float(progress) ** APD_ALPHA * theta / gamma
    return assign, (1.0 + penalty) * norm, theta


def apd_select(F, refs, progress, n_select=None, pad=True):
    """Reference-vector guided selection; returns selected row indices.

    One winner (minimal APD) per non-empty subpopulation. With ``pad`` the
    result is topped up to ``n_select`` from the remaining rows in APD order;
    if there are more winners than ``n_select`` the lowest-APD ones are kept.
    """
    F = np.asarray(F, dtype=float)
    if F.shape[0] == 0:
        raise ValueError("cannot select from an empty population")
    n_select = len(refs) if n_select is None else n_select
    assign, apd, _ = apd_values(F, refs, progress)
    winners = []
    for v in np.unique(assign):
        members = np.flatnonzero(assign == v)
        winners.append(members[np.argmin(apd[members])])
    winners = np.asarray(winners, dtype=int)
    winners = winners[np.argsort(apd[winners], kind="stable")]
    if winners.size >= n_select:
        return np.sort(winners[:n_select])
    if not pad:
        return np.sort(winners)
    rest = np.setdiff1d(np.arange(F.shape[0]), winners)
    rest = rest[np.argsort(apd[rest], kind="stable")]
    extra = rest[: n_select - winners.size]
    return np.sort(np.concatenate([winners, extra]))


# --------------------------------------------------------------------------
# single-objective GA for the cheap objectives
# --------------------------------------------------------------------------

def _tournament(fitness, rng, count):
    a = rng.integers(0, fitness.shape[0], count)
    b = rng.integers(0, fitness.shape[0], count)
    return np.where(fitness[a] <= fitness[b], a, b)


def soea_optimize_cheap(problem, j, budget, ledger, seed=None, init_X=None, init_y=None,
                        pop_size=50, history=None):
    """Spend exactly ``budget`` evaluations of cheap objective ``j`` with a real-coded GA.

    The population is seeded with the best ``pop_size`` rows of ``init_X``
    (already-evaluated points, typically the initial design) and topped up
    with random points. Every point evaluated here is returned, normalized
    to the unit cube. If ``history`` is a list, the best value after each
    generation is appended to it.
    """
    d = problem.d
    if budget <= 0:
        return GpTrainingSet(np.empty((0, d)), np.empty(0))
    rng = np.random.default_rng(seed)
    if init_X is not None and len(init_X):
        U0 = problem.normalize(init_X)
        y0 = np.asarray(init_y, dtype=float)
        order = np.argsort(y0, kind="stable")[:pop_size]
        pop, fit = U0[order], y0[order]
    else:
        pop, fit = np.empty((0, d)), np.empty(0)

    seen_U, seen_y = [], []
    remaining = budget
    if pop.shape[0] < min(pop_size, 2):
        k = min(pop_size - pop.shape[0], remaining)
        U = rng.random((k, d))
        y = evaluate_cheap_batch(problem, problem.denormalize(U), j, ledger)
        remaining -= k
        seen_U.append(U)
        seen_y.append(y)
        pop, fit = np.vstack([pop, U]), np.concatenate([fit, y])

    while remaining > 0:
        lam = min(pop_size, remaining)
        mates = pop[_tournament(fit, rng, 2 * ((lam + 1) // 2))]
        half = mates.shape[0] // 2
        c1, c2 = sbx_crossover(mates[:half], mates[half:], rng)
        kids = polynomial_mutation(np.vstack([c1, c2])[:lam], rng)
        y = evaluate_cheap_batch(problem, problem.denormalize(kids), j, ledger)
        remaining -= lam
        seen_U.append(kids)
        seen_y.append(y)
        allp, allf = np.vstack([pop, kids]), np.concatenate([fit, y])
        keep = np.argsort(allf, kind="stable")[:pop_size]
        pop, fit = allp[keep], allf[keep]
        if history is not None:
            history.append(float(fit[0]))
    return GpTrainingSet(np.vstack(seen_U), np.concatenate(seen_y))
