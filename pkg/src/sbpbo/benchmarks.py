"""DTLZ1-7 and WFG1-9 test problems with Pareto-front reference sets.

All functions here are vectorized over rows: decision matrices are ``(n, d)``
and objective matrices ``(n, m)``.
"""

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import qmc

from .evolution import simplex_lattice
from .kernels import nondominated_mask
from .problem import HeterogeneousProblem

DTLZ = tuple(f"DTLZ{i}" for i in range(1, 8))
WFG = tuple(f"WFG{i}" for i in range(1, 10))
FAMILIES = DTLZ + WFG


class BenchmarkSpecError(ValueError):
    pass


def default_wfg_k(m, d, family=None):
    """Largest multiple of ``m - 1`` not exceeding ``d / 2``; ``m - 1`` if none fits.

    WFG2 and WFG3 pair up distance variables, so for them the multiple is
    lowered until ``d - k`` is even (when such a multiple exists).
    """
    k = (d // 2) // (m - 1) * (m - 1)
    if family in ("WFG2", "WFG3"):
        while k > 0 and (d - k) % 2:
            k -= m - 1
    return k if k > 0 else m - 1


@dataclass(frozen=True)
class BenchmarkSpec:
    family: str
    m: int
    d: int
    k: Optional[int] = None

    def __post_init__(self):
        family = self.family.upper()
        object.__setattr__(self, "family", family)
        if family not in FAMILIES:
            raise BenchmarkSpecError(f"unknown benchmark family {self.family!r}")
        if self.m < 2:
            raise BenchmarkSpecError("need m >= 2")
        if family in DTLZ:
            if self.d < self.m:
                raise BenchmarkSpecError(f"{family} needs d >= m (got d={self.d}, m={self.m})")
            return
        k = default_wfg_k(self.m, self.d, family) if self.k is None else self.k
        object.__setattr__(self, "k", k)
        if k % (self.m - 1) != 0:
            raise BenchmarkSpecError(f"WFG k={k} must be divisible by m-1={self.m - 1}")
        if not 0 < k < self.d:
            raise BenchmarkSpecError(f"WFG needs 0 < k < d (got k={k}, d={self.d})")
        if family in ("WFG2", "WFG3") and (self.d - k) % 2 != 0:
            raise BenchmarkSpecError(f"{family} needs an even number of distance variables")


# --------------------------------------------------------------------------
# DTLZ
# --------------------------------------------------------------------------

def _g_rastrigin(xm):
    k = xm.shape[1]
    return 100.0 * (k + np.sum((xm - 0.5) ** 2 - np.cos(20.0 * np.pi * (xm - 0.5)), axis=1))


def _g_sphere(xm):
    return np.sum((xm - 0.5) ** 2, axis=1)


def _sphere_shape(theta, radius):
    """Map angles ``(n, m-1)`` in [0, pi/2] onto a sphere of the given radii."""
    n, mm1 = theta.shape
    m = mm1 + 1
    F = np.empty((n, m))
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    for i in range(m):
        f = radius.copy()
        f *= np.prod(cos_t[:, : m - 1 - i], axis=1)
        if i > 0:
            f *= sin_t[:, m - 1 - i]
        F[:, i] = f
    return F


def dtlz(family, X, m):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    xp, xm = X[:, : m - 1], X[:, m - 1 :]
    if family == "DTLZ1":
        g = _g_rastrigin(xm)
        F = np.empty((X.shape[0], m))
        for i in range(m):
            f = 0.5 * (1.0 + g) * np.prod(xp[:, : m - 1 - i], axis=1)
            if i > 0:
                f *= 1.0 - xp[:, m - 1 - i]
            F[:, i] = f
        return F
    if family in ("DTLZ2", "DTLZ3", "DTLZ4"):
        g = _g_rastrigin(xm) if family == "DTLZ3" else _g_sphere(xm)
        if family == "DTLZ4":
            xp = xp**100.0
        return _sphere_shape(xp * (np.pi / 2), 1.0 + g)
    if family in ("DTLZ5", "DTLZ6"):
        g = _g_sphere(xm) if family == "DTLZ5" else np.sum(xm**0.1, axis=1)
        theta = np.empty_like(xp)
        theta[:, 0] = xp[:, 0] * np.pi / 2
        if m > 2:
            theta[:, 1:] = (np.pi / (4.0 * (1.0 + g)))[:, None] * (1.0 + 2.0 * g[:, None] * xp[:, 1:])
        return _sphere_shape(theta, 1.0 + g)
    if family == "DTLZ7":
        g = 1.0 + 9.0 / xm.shape[1] * np.sum(xm, axis=1)
        F = np.empty((X.shape[0], m))
        F[:, : m - 1] = xp
        h = m - np.sum(xp / (1.0 + g[:, None]) * (1.0 + np.sin(3.0 * np.pi * xp)), axis=1)
        F[:, m - 1] = (1.0 + g) * h
        return F
    raise BenchmarkSpecError(family)


# --------------------------------------------------------------------------
# WFG transformation toolkit
# --------------------------------------------------------------------------

def _clip01(y):
    return np.clip(y, 0.0, 1.0)


def s_linear(y, a):
    return _clip01(np.abs(y - a) / np.abs(np.floor(a - y) + a))


def s_deceptive(y, a, b, c):
    t1 = np.floor(y - a + b) * (1.0 - c + (a - b) / b) / (a - b)
    t2 = np.floor(a + b - y) * (1.0 - c + (1.0 - a - b) / b) / (1.0 - a - b)
    return _clip01(1.0 + (np.abs(y - a) - b) * (t1 + t2 + 1.0 / b))


def s_multi(y, a, b, c):
    t = np.abs(y - c) / (2.0 * (np.floor(c - y) + c))
    return _clip01((1.0 + np.cos((4.0 * a + 2.0) * np.pi * (0.5 - t)) + 4.0 * b * t * t) / (b + 2.0))


def b_poly(y, alpha):
    return _clip01(y**alpha)


def b_flat(y, a, b, c):
    t1 = np.minimum(0.0, np.floor(y - b)) * a * (b - y) / b
    t2 = np.minimum(0.0, np.floor(c - y)) * (1.0 - a) * (y - c) / (1.0 - c)
    return _clip01(a + t1 - t2)


def b_param(y, u, a, b, c):
    v = a - (1.0 - 2.0 * u) * np.abs(np.floor(0.5 - u) + a)
    return _clip01(y ** (b + (c - b) * v))


def r_sum(y, w):
    return _clip01(y @ w / np.sum(w))


def r_nonsep(y, a):
    n = y.shape[1]
    total = np.zeros(y.shape[0])
    for j in range(n):
        total += y[:, j]
        for k in range(a - 1):
            total += np.abs(y[:, j] - y[:, (j + k + 1) % n])
    denom = n / a * math.ceil(a / 2) * (1.0 + 2.0 * a - 2.0 * math.ceil(a / 2))
    return _clip01(total / denom)


def _wfg_reduce(y, m, k, reducer):
    """Apply ``reducer(block, start, stop)`` to the m-1 position groups and the distance block."""
    gap = k // (m - 1)
    cols = [reducer(y[:, i * gap : (i + 1) * gap], i * gap, (i + 1) * gap) for i in range(m - 1)]
    cols.append(reducer(y[:, k:], k, y.shape[1]))
    return np.column_stack(cols)


def _shape_linear(x, m):
    n = x.shape[0]
    h = np.empty((n, m))
    for i in range(m):
        v = np.prod(x[:, : m - 1 - i], axis=1)
        if i > 0:
            v = v * (1.0 - x[:, m - 1 - i])
        h[:, i] = v
    return h


def _shape_convex(x, m):
    n = x.shape[0]
    h = np.empty((n, m))
    one_minus_cos = 1.0 - np.cos(x * np.pi / 2)
    for i in range(m):
        v = np.prod(one_minus_cos[:, : m - 1 - i], axis=1)
        if i > 0:
            v = v * (1.0 - np.sin(x[:, m - 1 - i] * np.pi / 2))
        h[:, i] = v
    return h


def _shape_concave(x, m):
    n = x.shape[0]
    h = np.empty((n, m))
    sin_x = np.sin(x * np.pi / 2)
    for i in range(m):
        v = np.prod(sin_x[:, : m - 1 - i], axis=1)
        if i > 0:
            v = v * np.cos(x[:, m - 1 - i] * np.pi / 2)
        h[:, i] = v
    return h


def _mixed(x1, alpha=1.0, a=5.0):
    return (1.0 - x1 - np.cos(2.0 * a * np.pi * x1 + np.pi / 2) / (2.0 * a * np.pi)) ** alpha


def _disc(x1, alpha=1.0, beta=1.0, a=5.0):
    return 1.0 - x1**alpha * np.cos(a * x1**beta * np.pi) ** 2


def _wfg_degeneracy(family, m):
    a = np.ones(m - 1)
    if family == "WFG3":
        a[1:] = 0.0
    return a


def _wfg_shape(family, x, m):
    if family == "WFG1":
        h = _shape_convex(x, m)
        h[:, -1] = _mixed(x[:, 0])
    elif family == "WFG2":
        h = _shape_convex(x, m)
        h[:, -1] = _disc(x[:, 0])
    elif family == "WFG3":
        h = _shape_linear(x, m)
    else:
        h = _shape_concave(x, m)
    return h


def _wfg_transform(family, y, m, k):
    n = y.shape[1]
    y = y.copy()
    ones = lambda blk, lo, hi: r_sum(blk, np.ones(hi - lo))  # noqa: E731
    if family == "WFG1":
        y[:, k:] = s_linear(y[:, k:], 0.35)
        y[:, k:] = b_flat(y[:, k:], 0.8, 0.75, 0.85)
        y = b_poly(y, 0.02)
        w = 2.0 * np.arange(1, n + 1)
        return _wfg_reduce(y, m, k, lambda blk, lo, hi: r_sum(blk, w[lo:hi]))
    if family in ("WFG2", "WFG3"):
        y[:, k:] = s_linear(y[:, k:], 0.35)
        l = n - k
        pairs = [r_nonsep(y[:, k + 2 * i : k + 2 * i + 2], 2) for i in range(l // 2)]
        y = np.column_stack([y[:, :k]] + pairs)
        return _wfg_reduce(y, m, k, ones)
    if family == "WFG4":
        return _wfg_reduce(s_multi(y, 30.0, 10.0, 0.35), m, k, ones)
    if family == "WFG5":
        return _wfg_reduce(s_deceptive(y, 0.35, 0.001, 0.05), m, k, ones)
    if family == "WFG6":
        y[:, k:] = s_linear(y[:, k:], 0.35)
        return _wfg_reduce(y, m, k, lambda blk, lo, hi: r_nonsep(blk, hi - lo))
    if family == "WFG7":
        src = y.copy()
        for i in range(k):
            u = r_sum(src[:, i + 1 :], np.ones(n - i - 1))
            y[:, i] = b_param(src[:, i], u, 0.98 / 49.98, 0.02, 50.0)
        y[:, k:] = s_linear(y[:, k:], 0.35)
        return _wfg_reduce(y, m, k, ones)
    if family == "WFG8":
        src = y.copy()
        for i in range(k, n):
            u = r_sum(src[:, :i], np.ones(i))
            y[:, i] = b_param(src[:, i], u, 0.98 / 49.98, 0.02, 50.0)
        y[:, k:] = s_linear(y[:, k:], 0.35)
        return _wfg_reduce(y, m, k, ones)
    if family == "WFG9":
        src = y.copy()
        for i in range(n - 1):
            u = r_sum(src[:, i + 1 :], np.ones(n - i - 1))
            y[:, i] = b_param(src[:, i], u, 0.98 / 49.98, 0.02, 50.0)
        y[:, :k] = s_deceptive(y[:, :k], 0.35, 0.001, 0.05)
        y[:, k:] = s_multi(y[:, k:], 30.0, 95.0, 0.35)
        return _wfg_reduce(y, m, k, lambda blk, lo, hi: r_nonsep(blk, hi - lo))
    raise BenchmarkSpecError(family)


def wfg(family, X, m, k):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[1]
    y = _clip01(X / (2.0 * np.arange(1, n + 1)))
    t = _wfg_transform(family, y, m, k)
    a = _wfg_degeneracy(family, m)
    x = np.empty_like(t)
    x[:, : m - 1] = np.maximum(t[:, -1:], a) * (t[:, : m - 1] - 0.5) + 0.5
    x[:, -1] = t[:, -1]
    scale = 2.0 * np.arange(1, m + 1)
    return x[:, -1:] + scale * _wfg_shape(family, x[:, : m - 1], m)


# --------------------------------------------------------------------------
# Problem construction
# --------------------------------------------------------------------------

def bounds_for(spec):
    if spec.family in DTLZ:
        return np.zeros(spec.d), np.ones(spec.d)
    return np.zeros(spec.d), 2.0 * np.arange(1, spec.d + 1)


def objective_batch(spec):
    if spec.family in DTLZ:
        return lambda X: dtlz(spec.family, X, spec.m)
    return lambda X: wfg(spec.family, X, spec.m, spec.k)


def _single_objective(batch, i):
    def f(x):
        return float(batch(np.asarray(x, dtype=float)[None, :])[0, i])

    f.__name__ = f"f{i}"
    return f


def make_problem(spec, ratios=None, threshold=1):
    """Build a :class:`HeterogeneousProblem` for a benchmark instance.

    ``ratios`` defaults to all ones (homogeneous costs).
    """
    if isinstance(spec, str):
        raise TypeError("pass a BenchmarkSpec, not a family name")
    ratios = tuple(ratios) if ratios is not None else (1,) * spec.m
    if len(ratios) != spec.m:
        raise BenchmarkSpecError(f"got {len(ratios)} ratios for {spec.m} objectives")
    lower, upper = bounds_for(spec)
    batch = objective_batch(spec)
    meta = {"family": spec.family, "m": spec.m, "d": spec.d}
    if spec.k is not None:
        meta["k"] = spec.k
    return HeterogeneousProblem(
        name=spec.family,
        lower=lower,
        upper=upper,
        ratios=ratios,
        threshold=threshold,
        objectives=tuple(_single_objective(batch, i) for i in range(spec.m)),
        batch=batch,
        metadata=meta,
    )


# --------------------------------------------------------------------------
# Reference fronts
# --------------------------------------------------------------------------

def lattice_at_least(count, m):
    h = 1
    while math.comb(h + m - 1, m - 1) < count:
        h += 1
    return simplex_lattice(h, m)


def farthest_point_subset(P, count):
    """Greedy max-min subset of ``count`` rows, starting from the row with the largest first coordinate."""
    n = P.shape[0]
    if n <= count:
        return P
    chosen = np.empty(count, dtype=int)
    chosen[0] = int(np.argmax(P[:, 0]))
    dist = np.sum((P - P[chosen[0]]) ** 2, axis=1)
    for i in range(1, count):
        nxt = int(np.argmax(dist))
        chosen[i] = nxt
        dist = np.minimum(dist, np.sum((P - P[nxt]) ** 2, axis=1))
    return P[np.sort(chosen)]


_MAX_SAMPLE = 2**15


def _sobol(n, dim, seed):
    sampler = qmc.Sobol(d=dim, scramble=True, rng=seed)
    return sampler.random_base2(int(math.ceil(math.log2(max(n, 2)))))


def _filtered(F):
    F = np.unique(F, axis=0)
    return F[nondominated_mask(F)]


def default_front_size(m):
    return 5000 if m >= 10 else 1000


def sample_reference_front(spec, count=None, seed=0):
    """Return ``(points, info)`` with ``count`` points of the true Pareto front.

    ``info`` records how the set was constructed; ``info["approximate"]`` is
    True where the front had to be found by filtering an evaluated sample.
    """
    m = spec.m
    count = default_front_size(m) if count is None else count
    fam = spec.family
    info = {"family": fam, "m": m, "count": count, "method": "analytic", "approximate": False}

    if fam == "DTLZ1":
        F = 0.5 * lattice_at_least(count, m)
    elif fam in ("DTLZ2", "DTLZ3", "DTLZ4"):
        L = lattice_at_least(count, m)
        F = L / np.linalg.norm(L, axis=1, keepdims=True)
    elif fam in ("DTLZ5", "DTLZ6") and m <= 3:
        t = np.linspace(0.0, np.pi / 2, max(count, 2))
        if m == 2:
            F = np.column_stack([np.cos(t), np.sin(t)])
        else:
            F = np.column_stack([np.cos(t) / np.sqrt(2), np.cos(t) / np.sqrt(2), np.sin(t)])
    elif fam in ("DTLZ5", "DTLZ6"):
        batch = objective_batch(spec)
        rng = np.random.default_rng(seed)
        size = min(16 * count, _MAX_SAMPLE)
        X = rng.random((size, spec.d))
        X[:, m - 1 :] = 0.5 if fam == "DTLZ5" else 0.0
        Xg = rng.random((size, spec.d))
        F = _filtered(np.vstack([batch(X), batch(Xg)]))
        info.update(method="filtered-sample", approximate=True)
    elif fam == "DTLZ7":
        U = _sobol(min(16 * count, _MAX_SAMPLE), m - 1, seed)
        F = np.empty((U.shape[0], m))
        F[:, : m - 1] = U
        F[:, m - 1] = 2.0 * (m - np.sum(U / 2.0 * (1.0 + np.sin(3.0 * np.pi * U)), axis=1))
        F = _filtered(F)
        info.update(method="filtered-sample")
    else:
        a = _wfg_degeneracy(fam, m)
        U = _sobol(min(16 * count, _MAX_SAMPLE), m - 1, seed)
        U = np.where(a > 0, U, 0.5)
        # distance term vanishes on the front
        F = 2.0 * np.arange(1, m + 1) * _wfg_shape(fam, U, m)
        F = _filtered(F)
        info.update(method="shape-sample")
        if fam == "WFG3" and m > 2:
            info["note"] = "degenerate linear front"
    F = farthest_point_subset(F, count)
    info["size"] = int(F.shape[0])
    return F, info


def write_front_csv(path, F):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"f{i + 1}" for i in range(F.shape[1])])
        for row in F:
            w.writerow([repr(float(v)) for v in row])
