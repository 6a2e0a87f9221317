"""Heterogeneous multi-objective problem model and evaluation budget accounting."""

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np


class InvalidProblemError(ValueError):
    """Problem definition violates the heterogeneous-ratio model."""


class BudgetExhaustedError(RuntimeError):
    """An expensive (full) evaluation was requested past the budget cap."""


class DomainError(ValueError):
    """Decision vector outside the box bounds or of the wrong length."""


@dataclass(frozen=True)
class ObjectivePartition:
    cheap: tuple
    expensive: tuple

    @property
    def p(self) -> int:
        return len(self.cheap)

    @property
    def q(self) -> int:
        return len(self.expensive)


@dataclass(frozen=True)
class ObjectiveVector:
    """Objective values with an explicit evaluation mask.

    Reading a component whose mask is False raises instead of returning a
    placeholder.
    """

    values: np.ndarray
    mask: np.ndarray

    def __getitem__(self, i):
        if not self.mask[i]:
            raise KeyError(f"objective {i} was not evaluated")
        return float(self.values[i])

    @property
    def complete(self) -> bool:
        return bool(np.all(self.mask))


@dataclass(frozen=True)
class HeterogeneousProblem:
    """Box-constrained problem whose objectives differ in evaluation cost.

    ``ratios[i]`` is how many times objective ``i`` can be evaluated per
    evaluation of the slowest objective; objectives with a ratio above
    ``threshold`` are treated as cheap.

    ``objectives`` holds one callable per objective, each mapping a decision
    vector to a float. ``batch`` optionally maps an ``(n, d)`` array to the full
    ``(n, m)`` objective matrix and is used as a fast path.
    """

    name: str
    lower: np.ndarray
    upper: np.ndarray
    ratios: tuple
    threshold: int
    objectives: tuple
    batch: Optional[Callable[[np.ndarray], np.ndarray]] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "ratios", tuple(int(r) for r in self.ratios))
        object.__setattr__(self, "objectives", tuple(self.objectives))
        if lower.shape != upper.shape or lower.ndim != 1:
            raise InvalidProblemError("bounds must be two vectors of equal length")
        if np.any(upper <= lower):
            raise InvalidProblemError("every upper bound must exceed its lower bound")
        if len(self.ratios) != len(self.objectives):
            raise InvalidProblemError("need exactly one ratio per objective")
        if len(self.objectives) < 2:
            raise InvalidProblemError("at least two objectives are required")
        if min(self.ratios) < 1:
            raise InvalidProblemError("ratios must be >= 1")
        if min(self.ratios) != 1:
            raise InvalidProblemError("the slowest objective must have ratio 1")

    @property
    def m(self) -> int:
        return len(self.objectives)

    @property
    def d(self) -> int:
        return self.lower.shape[0]

    def check_bounds(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.d:
            raise DomainError(f"expected {self.d} decision variables, got {x.shape[-1]}")
        tol = 1e-12 * (self.upper - self.lower)
        if np.any(x < self.lower - tol) or np.any(x > self.upper + tol):
            raise DomainError("decision vector outside the box bounds")
        return np.clip(x, self.lower, self.upper)

    def normalize(self, X):
        return (np.asarray(X, dtype=float) - self.lower) / (self.upper - self.lower)

    def denormalize(self, U):
        return self.lower + np.asarray(U, dtype=float) * (self.upper - self.lower)

    def evaluate_matrix(self, X, columns=None):
        """Raw objective values for rows of ``X``; no budget accounting."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        cols = range(self.m) if columns is None else columns
        if self.batch is not None:
            return np.asarray(self.batch(X), dtype=float)[:, list(cols)]
        out = np.empty((X.shape[0], len(cols)))
        for r, x in enumerate(X):
            for c, i in enumerate(cols):
                out[r, c] = self.objectives[i](x)
        return out


def partition_objectives(problem) -> ObjectivePartition:
    """Split objective indices into cheap (ratio > threshold) and expensive."""
    ratios = problem.ratios
    cheap = tuple(i for i, r in enumerate(ratios) if r > problem.threshold)
    expensive = tuple(i for i, r in enumerate(ratios) if r <= problem.threshold)
    if not expensive:
        raise InvalidProblemError(
            f"all objectives are cheap for ratios={ratios} and threshold={problem.threshold}"
        )
    return ObjectivePartition(cheap=cheap, expensive=expensive)


@dataclass
class BudgetLedger:
    """Evaluation counters; the only mutable state touched by evaluation.

    ``slack`` lets an iteration that started below the cap finish its batch:
    full evaluations are refused once ``fe_expensive >= fe_max_expensive + slack``.
    """

    fe_max_expensive: int
    cheap_indices: Sequence[int]
    slack: int = 0
    fe_expensive: int = 0
    fe_cheap: dict = field(default_factory=dict)

    def __post_init__(self):
        self.cheap_indices = tuple(self.cheap_indices)
        for j in self.cheap_indices:
            self.fe_cheap.setdefault(j, 0)

    @property
    def exhausted(self) -> bool:
        return self.fe_expensive >= self.fe_max_expensive

    def charge_full(self, count=1):
        if self.fe_expensive + count > self.fe_max_expensive + self.slack:
            raise BudgetExhaustedError(
                f"full evaluation budget {self.fe_max_expensive} exhausted "
                f"(used {self.fe_expensive}, requested {count})"
            )
        self.fe_expensive += count
        for j in self.cheap_indices:
            self.fe_cheap[j] += count

    def charge_cheap(self, j, count=1):
        if j not in self.fe_cheap:
            raise IndexError(f"objective {j} is not cheap")
        self.fe_cheap[j] += count


def evaluate_full(problem, x, ledger) -> ObjectiveVector:
    """Evaluate every objective at ``x``; costs one expensive evaluation."""
    x = problem.check_bounds(x)
    ledger.charge_full()
    values = problem.evaluate_matrix(x[None, :])[0]
    return ObjectiveVector(values=values, mask=np.ones(problem.m, dtype=bool))


def evaluate_full_batch(problem, X, ledger) -> np.ndarray:
    """Row-wise :func:`evaluate_full` returning the ``(n, m)`` value matrix."""
    X = problem.check_bounds(np.atleast_2d(X))
    ledger.charge_full(X.shape[0])
    return problem.evaluate_matrix(X)


def evaluate_cheap(problem, x, j, ledger) -> float:
    """Evaluate cheap objective ``j`` only; expensive counter is untouched."""
    if j not in ledger.fe_cheap:
        raise IndexError(f"objective {j} is not cheap")
    x = problem.check_bounds(x)
    ledger.charge_cheap(j)
    return float(problem.objectives[j](x))


def evaluate_cheap_batch(problem, X, j, ledger) -> np.ndarray:
    if j not in ledger.fe_cheap:
        raise IndexError(f"objective {j} is not cheap")
    X = problem.check_bounds(np.atleast_2d(X))
    ledger.charge_cheap(j, X.shape[0])
    return problem.evaluate_matrix(X, columns=[j])[:, 0]
