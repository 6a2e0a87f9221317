"""Per-objective surrogate bank and training-data management.

Expensive objectives get one GP trained on the (capped) fully evaluated
archive. Each cheap objective gets a two-member ensemble: a GP refitted every
iteration on the capped archive plus the cheap-only samples, and a GP fitted
once on the data gathered while optimizing that objective alone at start-up.
"""

import logging
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.cluster.vq import kmeans2

from . import gp
from .gp import GpTrainingSet
from .kernels import nondominated_mask

log = logging.getLogger(__name__)

ENSEMBLE = "ensemble"
SINGLE_RANDOM = "single-random"
SINGLE_CLUSTER = "single-cluster"
TRUE_CHEAP = "true-cheap"


def training_cap(d):
    return 11 * d - 1 + 25


@dataclass(frozen=True)
class GpOptions:
    restarts: int = 5
    warm_start: bool = True


@dataclass(frozen=True)
class SurrogateBank:
    cheap: tuple
    expensive: tuple
    cap: int
    mode: str = ENSEMBLE
    expensive_models: dict = field(default_factory=dict)
    cheap_updated_models: dict = field(default_factory=dict)
    cheap_frozen_models: dict = field(default_factory=dict)
    extra_cheap: dict = field(default_factory=dict)
    options: GpOptions = GpOptions()

    @property
    def m(self):
        return len(self.cheap) + len(self.expensive)

    def model_count(self):
        return len(self.expensive_models) + len(self.cheap_updated_models) + len(self.cheap_frozen_models)

    def training_sizes(self):
        sizes = {i: len(mod.training) for i, mod in self.expensive_models.items()}
        sizes.update({j: len(mod.training) for j, mod in self.cheap_updated_models.items()})
        return sizes

    def predict(self, U, cheap_values=None):
        """Predicted ``(mean, std)`` matrices of shape ``(n, m)`` at unit-cube rows ``U``.

        In true-cheap mode ``cheap_values(U, j)`` supplies exact values for
        cheap objective ``j`` and their std is zero.
        """
        U = np.atleast_2d(U)
        mu = np.empty((U.shape[0], self.m))
        sd = np.empty_like(mu)
        for i, model in self.expensive_models.items():
            mu[:, i], sd[:, i] = gp.predict(model, U)
        for j in self.cheap:
            if self.mode == TRUE_CHEAP:
                mu[:, j] = cheap_values(U, j)
                sd[:, j] = 0.0
            elif self.mode == ENSEMBLE:
                mu[:, j], sd[:, j] = ensemble_predict(self, j, U)
            else:
                mu[:, j], sd[:, j] = gp.predict(self.cheap_updated_models[j], U)
        return mu, sd


def ensemble_weights(sigma_updated, sigma_frozen):
    """Weights of the updated and frozen members; the less uncertain member weighs more.

    Where both stds vanish the members are averaged.
    """
    s, sp = np.asarray(sigma_updated, dtype=float), np.asarray(sigma_frozen, dtype=float)
    tot = s + sp
    zero = tot <= 0
    safe = np.where(zero, 1.0, tot)
    a = np.where(zero, 0.5, sp / safe)
    return a, 1.0 - a


def combine(mu_updated, sigma_updated, mu_frozen, sigma_frozen):
    a, b = ensemble_weights(sigma_updated, sigma_frozen)
    mean = a * np.asarray(mu_updated) + b * np.asarray(mu_frozen)
    return mean, np.minimum(sigma_updated, sigma_frozen)


def ensemble_predict(bank, j, x):
    """Ensemble mean and std for cheap objective ``j``; std is the smaller member std."""
    mu1, s1 = gp.predict(bank.cheap_updated_models[j], x)
    mu2, s2 = gp.predict(bank.cheap_frozen_models[j], x)
    mean, std = combine(mu1, s1, mu2, s2)
    if np.ndim(mean) == 0:
        return float(mean), float(std)
    return mean, std


# --------------------------------------------------------------------------
# training subset selection
# --------------------------------------------------------------------------

def crowding_distance(F):
    n, m = F.shape
    dist = np.zeros(n)
    if n <= 2:
        return np.full(n, np.inf)
    for k in range(m):
        order = np.argsort(F[:, k], kind="stable")
        span = F[order[-1], k] - F[order[0], k]
        dist[order[0]] = dist[order[-1]] = np.inf
        if span <= 0:
            continue
        dist[order[1:-1]] += (F[order[2:], k] - F[order[:-2], k]) / span
    return dist


def _max_min_fill(U, chosen_mask, count):
    """Add ``count`` rows greedily maximizing the distance to rows already chosen."""
    picked = []
    chosen = np.flatnonzero(chosen_mask)
    if chosen.size:
        dist = np.min(np.sum((U[:, None, :] - U[None, chosen, :]) ** 2, axis=2), axis=1)
    else:
        dist = np.full(U.shape[0], np.inf)
    dist = np.where(chosen_mask, -np.inf, dist)
    for _ in range(count):
        i = int(np.argmax(dist))
        if dist[i] == -np.inf:
            break
        picked.append(i)
        dist = np.minimum(dist, np.sum((U - U[i]) ** 2, axis=1))
        dist[i] = -np.inf
    return picked


def cluster_representatives(U, k, seed=0):
    """``k`` row indices: per k-means cluster, the member nearest the centroid.

    Empty or colliding clusters are compensated by max-min distance filling,
    so exactly ``min(k, len(U))`` distinct indices come back.
    """
    n = U.shape[0]
    if k >= n:
        return np.arange(n)
    if k <= 0:
        return np.empty(0, dtype=int)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # empty clusters are handled below
        centroids, labels = kmeans2(U, k, minit="++", seed=np.random.default_rng(seed))
    reps = []
    for c in range(k):
        members = np.flatnonzero(labels == c)
        if members.size == 0:
            continue
        dd = np.sum((U[members] - centroids[c]) ** 2, axis=1)
        reps.append(int(members[np.argmin(dd)]))
    reps = sorted(set(reps))
    if len(reps) < k:
        mask = np.zeros(n, dtype=bool)
        mask[reps] = True
        reps += _max_min_fill(U, mask, k - len(reps))
    return np.sort(np.asarray(reps[:k], dtype=int))


def select_training_subset(U, F, cap, newest=(), seed=0):
    """Indices of at most ``cap`` archive rows used to refit the per-iteration GPs.

    Priority: the newest rows, then the non-dominated rows (crowding-truncated),
    then k-means representatives of what is left in decision space.
    """
    n = U.shape[0]
    if n <= cap:
        return np.arange(n)
    newest = np.asarray(sorted(set(int(i) for i in newest)), dtype=int)[-cap:]
    chosen = np.zeros(n, dtype=bool)
    chosen[newest] = True

    slots = cap - int(chosen.sum())
    nd = np.flatnonzero(nondominated_mask(F) & ~chosen)
    if slots > 0 and nd.size:
        if nd.size > slots:
            cd = crowding_distance(F[nd])
            nd = nd[np.argsort(-cd, kind="stable")[:slots]]
        chosen[nd] = True

    slots = cap - int(chosen.sum())
    if slots > 0:
        rest = np.flatnonzero(~chosen)
        chosen[rest[cluster_representatives(U[rest], slots, seed)]] = True
    return np.flatnonzero(chosen)


def subset_for_variant(mode, U, cap, seed):
    """Fixed-size subset of all available data for the single-GP ablations."""
    n = U.shape[0]
    if n <= cap:
        return np.arange(n)
    if mode == SINGLE_RANDOM:
        return np.sort(np.random.default_rng(seed).choice(n, cap, replace=False))
    return cluster_representatives(U, cap, seed)


# --------------------------------------------------------------------------
# fitting
# --------------------------------------------------------------------------

def _fit(data, options, seed, previous=None):
    init = previous.length_scales if (previous is not None and options.warm_start) else None
    try:
        return gp.fit(data, restarts=options.restarts, seed=seed, init_length_scales=init)
    except gp.GpFitError:
        log.warning("GP fit failed on %d points, retrying with a larger nugget", len(data))
        return gp.fit(data, restarts=options.restarts, seed=seed, init_length_scales=init, nugget=1e-6)


def _column(U, F, i):
    return GpTrainingSet(U, F[:, i])


def initialize_bank(U, F, extra_cheap_data, cheap, expensive, cap, mode=ENSEMBLE,
                    options=GpOptions(), seed=0):
    """Fit the initial bank from the fully evaluated design ``(U, F)``.

    ``extra_cheap_data[j]`` is the start-up data of cheap objective ``j``. In
    ensemble mode it trains the frozen member (falling back to column ``j``
    of the design when empty); in single-GP modes it is pooled with the
    design before subsetting.
    """
    cheap, expensive = tuple(cheap), tuple(expensive)
    bank = SurrogateBank(cheap=cheap, expensive=expensive, cap=cap, mode=mode, options=options)
    return _refit(bank, U, F, extra_cheap_data, seed, initial=True)


def _refit(bank, U, F, pooled_cheap, seed, initial=False):
    exp_models, upd_models = {}, {}
    frozen = dict(bank.cheap_frozen_models)
    single = bank.mode in (SINGLE_RANDOM, SINGLE_CLUSTER)

    for i in bank.expensive:
        data = _column(U, F, i)
        if single:
            idx = subset_for_variant(bank.mode, U, bank.cap, seed + 7919 * i)
            data = GpTrainingSet(U[idx], F[idx, i])
        exp_models[i] = _fit(data, bank.options, seed + i, bank.expensive_models.get(i))

    if bank.mode == TRUE_CHEAP:
        return replace(bank, expensive_models=exp_models, cheap_updated_models={})

    for j in bank.cheap:
        extra = pooled_cheap.get(j)
        if single:
            data = GpTrainingSet.concat(_column(U, F, j), extra).deduplicated()
            idx = subset_for_variant(bank.mode, data.inputs, bank.cap, seed + 7919 * j)
            data = GpTrainingSet(data.inputs[idx], data.targets[idx])
        elif initial:
            data = _column(U, F, j)
        else:
            data = GpTrainingSet.concat(_column(U, F, j), extra)
        upd_models[j] = _fit(data, bank.options, seed + 101 + j, bank.cheap_updated_models.get(j))
        if initial and bank.mode == ENSEMBLE:
            src = extra if (extra is not None and len(extra) >= 2) else _column(U, F, j)
            frozen[j] = _fit(src, bank.options, seed + 211 + j)
    return replace(bank, expensive_models=exp_models, cheap_updated_models=upd_models,
                   cheap_frozen_models=frozen)


def accumulate_extra(previous, new, cap):
    """Append ``new`` cheap-only samples, keeping at most the newest ``cap`` rows."""
    merged = GpTrainingSet.concat(previous, new) if (previous is not None or new is not None) else None
    if merged is None or len(merged) == 0:
        return previous if previous is not None else new
    if len(merged) > cap:
        merged = GpTrainingSet(merged.inputs[-cap:], merged.targets[-cap:])
    return merged


def update_bank(bank, U_t, F_t, new_cheap_data, seed=0, all_cheap_data=None):
    """Refit the per-iteration models; frozen members are carried over untouched.

    Ensemble mode: expensive GPs on ``(U_t, F_t)``, updated cheap GPs on the
    same rows plus the accumulated cheap-only samples. Single-GP modes pool
    ``(U_t, F_t)`` with ``all_cheap_data[j]`` and subset to the cap.
    """
    if bank.mode in (SINGLE_RANDOM, SINGLE_CLUSTER):
        return _refit(bank, U_t, F_t, all_cheap_data or {}, seed)
    extra = dict(bank.extra_cheap)
    for j in bank.cheap:
        if new_cheap_data.get(j) is not None and len(new_cheap_data[j]):
            extra[j] = accumulate_extra(extra.get(j), new_cheap_data[j], bank.cap)
    bank = replace(bank, extra_cheap=extra)
    return _refit(bank, U_t, F_t, extra, seed)
