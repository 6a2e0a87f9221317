"""Gaussian-process assisted multi-objective optimization for problems whose
objectives have unequal evaluation costs."""

from .benchmarks import BenchmarkSpec, make_problem, sample_reference_front
from .harness import ExperimentConfig, report, run_experiment
from .metrics import igd, igd_plus
from .optimizer import VARIANTS, OptimizerConfig, run
from .problem import BudgetLedger, HeterogeneousProblem, partition_objectives

__version__ = "0.1.0"

__all__ = [
    "BenchmarkSpec",
    "BudgetLedger",
    "ExperimentConfig",
    "HeterogeneousProblem",
    "OptimizerConfig",
    "VARIANTS",
    "igd",
    "igd_plus",
    "make_problem",
    "partition_objectives",
    "report",
    "run",
    "run_experiment",
    "sample_reference_front",
]
