"""Hot numeric kernels, each in a numba and a pure-numpy flavour.

The public names at module level dispatch to one of the two according to
``sbpbo._accel.USE_NUMBA``. Both flavours stay importable as
``numpy_kernels`` / ``numba_kernels`` so tests and the benchmark script can
compare them directly.
"""

from types import SimpleNamespace

import numpy as np

from ._accel import USE_NUMBA, njit


# --------------------------------------------------------------------------
# numpy reference path
# --------------------------------------------------------------------------

def _np_sq_exp_corr(A, B, inv_ls2):
    diff = A[:, None, :] - B[None, :, :]
    return np.exp(-0.5 * np.einsum("ijk,ijk,k->ij", diff, diff, inv_ls2))


def _np_lml_grad_terms(X, C, W, inv_ls2):
    # C and W must be symmetric (the numba version sums i<j only)
    # sum_ij W_ij C_ij (x_ik - x_jk)^2 / l_k^2 for every k
    diff = X[:, None, :] - X[None, :, :]
    return np.einsum("ij,ijk->k", W * C, diff * diff) * inv_ls2


def _np_nondominated_mask(F):
    n = F.shape[0]
    mask = np.ones(n, dtype=np.bool_)
    for i in range(n):
        if not mask[i]:
            continue
        le = np.all(F <= F[i], axis=1)
        lt = np.any(F < F[i], axis=1)
        if np.any(le & lt):
            mask[i] = False
            continue
        # i knocks out everything it dominates
        ge = np.all(F[i] <= F, axis=1) & np.any(F[i] < F, axis=1)
        mask &= ~ge
    return mask


def _np_min_dplus(A, Z):
    gap = np.maximum(A[None, :, :] - Z[:, None, :], 0.0)
    return np.sqrt(np.min(np.sum(gap * gap, axis=2), axis=1))


def _np_min_dist(A, Z):
    diff = A[None, :, :] - Z[:, None, :]
    return np.sqrt(np.min(np.sum(diff * diff, axis=2), axis=1))


# --------------------------------------------------------------------------
# numba path
# --------------------------------------------------------------------------

@njit
def _nb_sq_exp_corr(A, B, inv_ls2):
    na, nb, d = A.shape[0], B.shape[0], A.shape[1]
    out = np.empty((na, nb))
    for i in range(na):
        for j in range(nb):
            s = 0.0
            for k in range(d):
                t = A[i, k] - B[j, k]
                s += t * t * inv_ls2[k]
            out[i, j] = np.exp(-0.5 * s)
    return out


@njit
def _nb_lml_grad_terms(X, C, W, inv_ls2):
    n, d = X.shape
    g = np.zeros(d)
    for i in range(n):
        for j in range(i + 1, n):
            wc = 2.0 * W[i, j] * C[i, j]  # symmetric pair counted twice
            for k in range(d):
                t = X[i, k] - X[j, k]
                g[k] += wc * t * t
    for k in range(d):
        g[k] *= inv_ls2[k]
    return g


@njit
def _nb_nondominated_mask(F):
    n, m = F.shape
    mask = np.ones(n, dtype=np.bool_)
    for i in range(n):
        if not mask[i]:
            continue
        for j in range(n):
            if i == j:
                continue
            # does j dominate i?
            le = True
            lt = False
            for k in range(m):
                if F[j, k] > F[i, k]:
                    le = False
                    break
                if F[j, k] < F[i, k]:
                    lt = True
            if le and lt:
                mask[i] = False
                break
    return mask


@njit
def _nb_min_dplus(A, Z):
    nz, na, m = Z.shape[0], A.shape[0], A.shape[1]
    out = np.empty(nz)
    for i in range(nz):
        best = np.inf
        for j in range(na):
            s = 0.0
            for k in range(m):
                t = A[j, k] - Z[i, k]
                if t > 0.0:
                    s += t * t
            if s < best:
                best = s
        out[i] = np.sqrt(best)
    return out


@njit
def _nb_min_dist(A, Z):
    nz, na, m = Z.shape[0], A.shape[0], A.shape[1]
    out = np.empty(nz)
    for i in range(nz):
        best = np.inf
        for j in range(na):
            s = 0.0
            for k in range(m):
                t = A[j, k] - Z[i, k]
                s += t * t
            if s < best:
                best = s
        out[i] = np.sqrt(best)
    return out


numpy_kernels = SimpleNamespace(
    sq_exp_corr=_np_sq_exp_corr,
    lml_grad_terms=_np_lml_grad_terms,
    nondominated_mask=_np_nondominated_mask,
    min_dplus=_np_min_dplus,
    min_dist=_np_min_dist,
)

numba_kernels = SimpleNamespace(
    sq_exp_corr=_nb_sq_exp_corr,
    lml_grad_terms=_nb_lml_grad_terms,
    nondominated_mask=_nb_nondominated_mask,
    min_dplus=_nb_min_dplus,
    min_dist=_nb_min_dist,
)

_active = numba_kernels if USE_NUMBA else numpy_kernels
BACKEND = "numba" if USE_NUMBA else "numpy"


def sq_exp_corr(A, B, inv_ls2):
    """Gaussian correlation ``exp(-0.5 * sum_k (a_k - b_k)^2 / l_k^2)`` between row sets."""
    return _active.sq_exp_corr(
        np.ascontiguousarray(A, dtype=float),
        np.ascontiguousarray(B, dtype=float),
        np.ascontiguousarray(inv_ls2, dtype=float),
    )


def lml_grad_terms(X, C, W, inv_ls2):
    """Contract ``W * dC/dlog(l_k)`` over all pairs, one value per dimension."""
    return _active.lml_grad_terms(
        np.ascontiguousarray(X, dtype=float),
        np.ascontiguousarray(C, dtype=float),
        np.ascontiguousarray(W, dtype=float),
        np.ascontiguousarray(inv_ls2, dtype=float),
    )


def nondominated_mask(F):
    """Boolean mask of rows of ``F`` not Pareto-dominated by any other row (minimization).

    Exact duplicates do not dominate each other, so all copies survive.
    """
    F = np.ascontiguousarray(F, dtype=float)
    if F.shape[0] == 0:
        return np.zeros(0, dtype=bool)
    return _active.nondominated_mask(F)


def min_dplus(A, Z):
    """For each reference row of ``Z``, the smallest IGD+ distance to the rows of ``A``."""
    return _active.min_dplus(np.ascontiguousarray(A, dtype=float), np.ascontiguousarray(Z, dtype=float))


def min_dist(A, Z):
    """For each reference row of ``Z``, the smallest Euclidean distance to the rows of ``A``."""
    return _active.min_dist(np.ascontiguousarray(A, dtype=float), np.ascontiguousarray(Z, dtype=float))
