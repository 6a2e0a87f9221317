"""Quality indicators against a reference front (minimization)."""

import numpy as np

from . import kernels


def _check(A, Z):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    if A.shape[0] == 0 or Z.shape[0] == 0:
        raise ValueError("solution set and reference set must be non-empty")
    if A.shape[1] != Z.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape[1]} objectives vs {Z.shape[1]} in the reference")
    return A, Z


def igd_plus(A, Z):
    """Mean over reference points of ``min_a ||max(a - z, 0)||``."""
    A, Z = _check(A, Z)
    return float(np.mean(kernels.min_dplus(A, Z)))


def igd(A, Z):
    """Mean over reference points of the Euclidean distance to the nearest solution."""
    A, Z = _check(A, Z)
    return float(np.mean(kernels.min_dist(A, Z)))
