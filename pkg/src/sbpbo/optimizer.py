"""Surrogate-assisted optimization loop for problems with heterogeneous objectives.

One run: a Latin-hypercube design evaluated on every objective, a GA per
cheap objective spending the cheap budget accrued meanwhile, then repeated
BO iterations of (surrogate RVEA search -> acquisition scoring -> u full
evaluations plus u*r_j - u cheap-only evaluations -> surrogate refit).
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import acquisition as acq
from . import ensemble as ens
from .evolution import (
    ReferenceVectorSet,
    apd_select,
    latin_hypercube,
    make_offspring,
    polynomial_mutation,
    soea_optimize_cheap,
)
from .gp import GpTrainingSet
from .kernels import nondominated_mask
from .metrics import igd_plus
from .problem import (
    BudgetLedger,
    evaluate_cheap_batch,
    evaluate_full_batch,
    partition_objectives,
)

log = logging.getLogger(__name__)

SBP_BO = "SBP_BO"
BO_AAF = "BO_AAF"
SBP_BO_R = "SBP_BO_R"
SBP_BO_C = "SBP_BO_C"
SBP_NOGPC = "SBP_NoGPc"
VARIANTS = (SBP_BO, BO_AAF, SBP_BO_R, SBP_BO_C, SBP_NOGPC)

_BANK_MODE = {
    SBP_BO: ens.ENSEMBLE,
    BO_AAF: ens.ENSEMBLE,
    SBP_BO_R: ens.SINGLE_RANDOM,
    SBP_BO_C: ens.SINGLE_CLUSTER,
    SBP_NOGPC: ens.TRUE_CHEAP,
}


def canonical_variant(name):
    key = name.replace("-", "_").replace(" ", "").lower()
    for v in VARIANTS:
        if v.lower() == key:
            return v
    raise ValueError(f"unknown variant {name!r}; choose from {', '.join(VARIANTS)}")


@dataclass(frozen=True)
class OptimizerConfig:
    fe_max_expensive: int = 300
    u: int = 3
    w_max: int = 20
    variant: str = SBP_BO
    seed: int = 0
    n_init: Optional[int] = None  # 11d - 1 when None
    gp_restarts: int = 5
    soea_pop_size: int = 50
    dedup_tol: float = 1e-9

    def __post_init__(self):
        object.__setattr__(self, "variant", canonical_variant(self.variant))
        if self.u < 1 or self.w_max < 1:
            raise ValueError("u and w_max must be >= 1")

    def initial_size(self, d):
        return 11 * d - 1 if self.n_init is None else self.n_init


@dataclass
class RunRecord:
    itrn: int
    fe_expensive: int
    fe_cheap: dict
    igd_plus: float
    wall_time: float
    sbp_mean: float = float("nan")
    archive_snapshot_ref: Optional[str] = None


@dataclass
class EvaluationArchive:
    """Fully evaluated rows ``(X, F)`` plus cheap-only samples per cheap objective."""

    d: int
    m: int
    X: np.ndarray = None
    F: np.ndarray = None
    cheap_X: dict = field(default_factory=dict)
    cheap_y: dict = field(default_factory=dict)
    nondominated: np.ndarray = None

    def __post_init__(self):
        if self.X is None:
            self.X = np.empty((0, self.d))
            self.F = np.empty((0, self.m))
        self._refresh()

    def _refresh(self):
        self.nondominated = np.flatnonzero(nondominated_mask(self.F))

    def add_full(self, X, F):
        X, F = np.atleast_2d(X), np.atleast_2d(F)
        if F.shape[1] != self.m or not np.all(np.isfinite(F)):
            raise ValueError("full records need all m objective values")
        self.X = np.vstack([self.X, X])
        self.F = np.vstack([self.F, F])
        self._refresh()
        return np.arange(self.X.shape[0] - X.shape[0], self.X.shape[0])

    def add_cheap(self, j, X, y):
        X = np.atleast_2d(X)
        if X.shape[0] == 0:
            return
        self.cheap_X.setdefault(j, []).append(X)
        self.cheap_y.setdefault(j, []).append(np.asarray(y, dtype=float))

    def cheap_data(self, j):
        if j not in self.cheap_X:
            return np.empty((0, self.d)), np.empty(0)
        return np.vstack(self.cheap_X[j]), np.concatenate(self.cheap_y[j])

    def nondominated_set(self):
        return self.X[self.nondominated], self.F[self.nondominated]

    def __len__(self):
        return self.X.shape[0]


# --------------------------------------------------------------------------
# inner surrogate search and infill selection
# --------------------------------------------------------------------------

def initial_inner_population(U_archive, F_archive, refs, rng, previous=None, predict=None):
    """Starting population of the surrogate search.

    Archive rows are picked by APD selection on their true objectives and
    topped up with random points. When the previous iteration's final
    population is given, it is pooled with those rows and the pool is
    reduced by APD selection on the current predictions, so surrogate
    search progress carries over between iterations.
    """
    n = len(refs)
    idx = apd_select(F_archive, refs.adapt(F_archive), 0.0, n_select=n)
    pop = U_archive[idx]
    if pop.shape[0] < n:
        pop = np.vstack([pop, rng.random((n - pop.shape[0], U_archive.shape[1]))])
    if previous is None or predict is None:
        return pop
    pool = np.vstack([previous, pop])
    mu, _ = predict(pool)
    return pool[apd_select(mu, refs.adapt(mu), 0.0, n_select=n)]


def inner_surrogate_search(predict, refs, w_max, rng, init_pop):
    """``w_max`` generations of RVEA on predicted objectives.

    ``predict(U)`` returns ``(mean, std)`` matrices. Returns the final
    population with its predictions ``(U, mean, std)``.
    """
    n = len(refs)
    pop = init_pop
    mu, sd = predict(pop)
    refs = refs.adapt(mu)
    every = math.ceil(w_max / 2)
    for w in range(1, w_max + 1):
        kids = make_offspring(pop, rng, n_offspring=n)
        kmu, ksd = predict(kids)
        allU = np.vstack([pop, kids])
        allmu = np.vstack([mu, kmu])
        allsd = np.vstack([sd, ksd])
        keep = apd_select(allmu, refs, w / w_max, n_select=n)
        pop, mu, sd = allU[keep], allmu[keep], allsd[keep]
        if w % every == 0:
            refs = refs.adapt(mu)
    return pop, mu, sd


def _far_from(U, ref, tol):
    if ref.shape[0] == 0:
        return np.ones(U.shape[0], dtype=bool)
    d2 = np.min(np.sum((U[:, None, :] - ref[None, :, :]) ** 2, axis=2), axis=1)
    return d2 > tol * tol


def _unique_rows(idx, U, tol):
    out = []
    for i in idx:
        if all(np.sum((U[i] - U[k]) ** 2) > tol * tol for k in out):
            out.append(int(i))
    return np.asarray(out, dtype=int)


def promising_refs(m, size):
    """Coarsest single-layer lattice with at least ``size`` vectors."""
    h = 1
    while math.comb(h + m - 1, m - 1) < size:
        h += 1
    return ReferenceVectorSet.create(m, (h,))


def select_new_samples(pop_U, scores, refs, u, cheap_counts, archive_U, rng, progress, tol=1e-9):
    """Pick ``u`` rows for full evaluation and ``cheap_counts[j]`` rows per cheap objective.

    The promising subset holds the APD winners on the acquisition scores
    over ``refs`` (see :func:`promising_refs`), padded in APD order to
    ``u + max(cheap_counts)`` rows when some vectors stay empty. Full-evaluation points
    never coincide with archived points; if the population cannot supply
    enough fresh points, mutated copies are used.
    Returns ``(X_full, {j: X_cheap})`` in unit-cube coordinates.
    """
    size = min(u + max(cheap_counts.values(), default=0), pop_U.shape[0])
    promising = apd_select(scores, refs.adapt(scores), progress, n_select=size)
    fresh = _far_from(pop_U, archive_U, tol)
    cand = _unique_rows(promising[fresh[promising]], pop_U, tol)
    if cand.size < u:
        others = np.setdiff1d(np.flatnonzero(fresh), cand)
        cand = _unique_rows(np.concatenate([cand, others]), pop_U, tol)
    full = [pop_U[i] for i in rng.permutation(cand)[:u]]
    tries = 0
    while len(full) < u:
        base = pop_U[promising[rng.integers(promising.size)]]
        x = polynomial_mutation(base, rng, prob=1.0)
        ref = np.vstack([archive_U] + ([np.array(full)] if full else []))
        if _far_from(x[None, :], ref, tol)[0] or tries > 1000:
            full.append(x)
        tries += 1
    X_full = np.asarray(full)

    pool = np.asarray([i for i in promising if _far_from(pop_U[i][None, :], X_full, tol)[0]], dtype=int)
    if pool.size == 0:
        pool = promising
    X_cheap = {}
    for j, need in cheap_counts.items():
        if need <= 0:
            X_cheap[j] = np.empty((0, pop_U.shape[1]))
            continue
        if pool.size >= need:
            pick = rng.choice(pool, need, replace=False)
        else:
            log.warning("only %d promising points for %d cheap samples of f%d; drawing with replacement",
                        pool.size, need, j)
            pick = np.concatenate([pool, rng.choice(pool, need - pool.size, replace=True)])
        X_cheap[j] = pop_U[pick]
    return X_full, X_cheap


# --------------------------------------------------------------------------
# the run
# --------------------------------------------------------------------------

def _seeds(seed, count):
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(count)]


def run(problem, config=OptimizerConfig(), reference_front=None, callback=None):
    """Optimize ``problem`` and return ``(archive, trace)``.

    Iterations continue while fewer than ``fe_max_expensive`` full
    evaluations have been used; the final batch may finish above the cap.
    """
    t0 = time.perf_counter()
    part = partition_objectives(problem)
    d, m, u = problem.d, problem.m, config.u
    variant = config.variant
    mode = _BANK_MODE[variant]
    s_lhs, s_soea, s_gp, s_inner, s_pick = _seeds(config.seed, 5)
    rng_inner = np.random.default_rng(s_inner)
    rng_pick = np.random.default_rng(s_pick)

    ledger = BudgetLedger(config.fe_max_expensive, part.cheap, slack=u - 1)
    archive = EvaluationArchive(d, m)
    cap = ens.training_cap(d)
    n = config.initial_size(d)

    X0 = latin_hypercube(n, d, problem.lower, problem.upper, seed=s_lhs)
    archive.add_full(X0, evaluate_full_batch(problem, X0, ledger))

    startup = {}
    if mode != ens.TRUE_CHEAP:
        for j in part.cheap:
            budget = n * problem.ratios[j] - n
            data = soea_optimize_cheap(problem, j, budget, ledger, seed=s_soea + j,
                                       init_X=archive.X, init_y=archive.F[:, j],
                                       pop_size=config.soea_pop_size)
            startup[j] = data
            if len(data):
                archive.add_cheap(j, problem.denormalize(data.inputs), data.targets)

    options = ens.GpOptions(restarts=config.gp_restarts)
    U_all = problem.normalize(archive.X)
    bank = ens.initialize_bank(U_all, archive.F, startup, part.cheap, part.expensive, cap,
                               mode=mode, options=options, seed=s_gp)

    def cheap_values(U, j):
        return evaluate_cheap_batch(problem, problem.denormalize(U), j, ledger)

    def predict(U):
        return bank.predict(U, cheap_values=cheap_values)

    def record(itrn, sbp_mean):
        score = float("nan")
        if reference_front is not None:
            score = igd_plus(archive.nondominated_set()[1], reference_front)
        rec = RunRecord(itrn=itrn, fe_expensive=ledger.fe_expensive, fe_cheap=dict(ledger.fe_cheap),
                        igd_plus=score, wall_time=time.perf_counter() - t0, sbp_mean=sbp_mean)
        trace.append(rec)
        if callback is not None:
            callback(rec, archive, bank)

    trace = []
    record(0, float("nan"))
    base_refs = ReferenceVectorSet.create(m)
    penalize = variant != BO_AAF
    cheap_counts = {j: u * problem.ratios[j] - u for j in part.cheap} if mode != ens.TRUE_CHEAP else {}
    pick_refs = promising_refs(m, u + max(cheap_counts.values(), default=0))
    itrn = 1
    while ledger.fe_expensive < config.fe_max_expensive:
        U_all = problem.normalize(archive.X)
        init_pop = initial_inner_population(U_all, archive.F, base_refs, rng_inner,
                                            previous=pop if itrn > 1 else None, predict=predict)
        pop, mu, sd = inner_surrogate_search(predict, base_refs, config.w_max, rng_inner, init_pop)

        ctx = acq.AcquisitionContext.from_population(
            mu, sd, problem.ratios, ledger.fe_expensive, config.fe_max_expensive, itrn)
        scores = acq.af_sbp(mu, sd, ctx, penalize=penalize)
        if penalize:
            sbp_mean = float(np.mean(acq.sbp_penalty(acq.normalize_means(mu, ctx), itrn, ctx.weights)))
        else:
            sbp_mean = 1.0
        progress = min(ledger.fe_expensive / config.fe_max_expensive, 1.0)
        U_new, U_cheap = select_new_samples(pop, scores, pick_refs, u, cheap_counts, U_all,
                                            rng_pick, progress, tol=config.dedup_tol)

        X_new = problem.denormalize(U_new)
        newest = archive.add_full(X_new, evaluate_full_batch(problem, X_new, ledger))
        new_cheap = {}
        for j, Uj in U_cheap.items():
            if Uj.shape[0] == 0:
                continue
            Xj = problem.denormalize(Uj)
            yj = evaluate_cheap_batch(problem, Xj, j, ledger)
            archive.add_cheap(j, Xj, yj)
            new_cheap[j] = GpTrainingSet(Uj, yj)

        U_all = problem.normalize(archive.X)
        fit_seed = s_gp + 1000 * itrn
        if mode in (ens.SINGLE_RANDOM, ens.SINGLE_CLUSTER):
            pooled = {}
            for j in part.cheap:
                Xc, yc = archive.cheap_data(j)
                pooled[j] = GpTrainingSet(problem.normalize(Xc), yc) if len(yc) else None
            bank = ens.update_bank(bank, U_all, archive.F, {}, seed=fit_seed, all_cheap_data=pooled)
        else:
            idx = ens.select_training_subset(U_all, archive.F, cap, newest=newest, seed=fit_seed)
            bank = ens.update_bank(bank, U_all[idx], archive.F[idx], new_cheap, seed=fit_seed)
        record(itrn, sbp_mean)
        itrn += 1
    return archive, trace
