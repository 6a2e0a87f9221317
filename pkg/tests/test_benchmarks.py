import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from sbpbo.benchmarks import (
    DTLZ,
    FAMILIES,
    WFG,
    BenchmarkSpec,
    BenchmarkSpecError,
    default_wfg_k,
    farthest_point_subset,
    make_problem,
    sample_reference_front,
)
from sbpbo.kernels import nondominated_mask


def _valid_specs(ms=(2, 3, 5, 10), d=10):
    out = []
    for fam in FAMILIES:
        for m in ms:
            try:
                out.append(BenchmarkSpec(fam, m, d))
            except BenchmarkSpecError:
                pass
    return out


def _random_inputs(problem, n, seed):
    rng = np.random.default_rng(seed)
    return problem.lower + rng.random((n, problem.d)) * (problem.upper - problem.lower)


@pytest.mark.parametrize("spec", _valid_specs(), ids=lambda s: f"{s.family}-m{s.m}")
def test_matches_scalar_oracle(spec):
    p = make_problem(spec)
    X = _random_inputs(p, 50, seed=FAMILIES.index(spec.family) * 100 + spec.m)
    F = p.batch(X)
    ref = np.array([oracles.evaluate(spec.family, x, spec.m, spec.k) for x in X])
    rel = np.abs(F - ref) / np.maximum(np.abs(ref), 1e-12)
    assert rel.max() <= 1e-6


@pytest.mark.parametrize("spec", _valid_specs(), ids=lambda s: f"{s.family}-m{s.m}")
def test_matches_pymoo(spec):
    pymoo_problems = pytest.importorskip("pymoo.problems")
    name = spec.family.lower()
    if spec.family in WFG:
        ref_problem = pymoo_problems.get_problem(name, n_var=spec.d, n_obj=spec.m, k=spec.k)
    else:
        ref_problem = pymoo_problems.get_problem(name, n_var=spec.d, n_obj=spec.m)
    p = make_problem(spec)
    X = _random_inputs(p, 50, seed=7)
    ref = ref_problem.evaluate(X)
    rel = np.abs(p.batch(X) - ref) / np.maximum(np.abs(ref), 1e-12)
    assert rel.max() <= 1e-6


def test_wfg_bounds():
    p = make_problem(BenchmarkSpec("WFG4", 5, 10, k=4))
    np.testing.assert_array_equal(p.upper, 2.0 * np.arange(1, 11))
    np.testing.assert_array_equal(p.lower, np.zeros(10))
    assert p.m == 5


def test_dtlz_shape():
    p = make_problem(BenchmarkSpec("DTLZ2", 3, 10))
    assert (p.m, p.d) == (3, 10)
    np.testing.assert_array_equal(p.upper, np.ones(10))


@pytest.mark.parametrize(
    "family, m, d, k",
    [("DTLZ2", 5, 4, None), ("WFG4", 3, 10, 3), ("WFG4", 3, 10, 10), ("WFG2", 10, 10, None), ("ZDT1", 2, 10, None)],
)
def test_invalid_specs(family, m, d, k):
    with pytest.raises(BenchmarkSpecError):
        BenchmarkSpec(family, m, d, k)


@pytest.mark.parametrize("m, family, k", [(2, "WFG4", 5), (3, "WFG4", 4), (5, "WFG4", 4), (10, "WFG4", 9),
                                          (2, "WFG2", 4), (3, "WFG3", 4)])
def test_default_wfg_k(m, family, k):
    assert default_wfg_k(m, 10, family) == k


@given(st.sampled_from(_valid_specs(ms=(2, 3, 5))), st.integers(0, 2**32 - 1))
def test_objectives_non_negative(spec, seed):
    p = make_problem(spec)
    F = p.batch(_random_inputs(p, 8, seed))
    assert np.all(F >= -1e-12)


def _on_front_inputs(spec, n, seed):
    """Decision vectors whose distance variables sit at their optimal values."""
    rng = np.random.default_rng(seed)
    X = rng.random((n, spec.d))
    X[:, spec.m - 1:] = 0.5
    return X


@pytest.mark.parametrize("m", [2, 3, 5, 10])
def test_dtlz_optimal_identities(m):
    X = _on_front_inputs(BenchmarkSpec("DTLZ1", m, 10), 100, m)
    F1 = make_problem(BenchmarkSpec("DTLZ1", m, 10)).batch(X)
    np.testing.assert_allclose(F1.sum(axis=1), 0.5, atol=1e-12)
    for fam in ("DTLZ2", "DTLZ3", "DTLZ4", "DTLZ5"):
        F = make_problem(BenchmarkSpec(fam, m, 10)).batch(X)
        np.testing.assert_allclose(np.sum(F**2, axis=1), 1.0, atol=1e-12)


def test_dtlz6_optimum_on_sphere():
    X = _on_front_inputs(BenchmarkSpec("DTLZ6", 3, 10), 50, 0)
    X[:, 2:] = 0.0
    F = make_problem(BenchmarkSpec("DTLZ6", 3, 10)).batch(X)
    np.testing.assert_allclose(np.sum(F**2, axis=1), 1.0, atol=1e-12)


def test_front_dtlz1_dtlz2_identities():
    Z1, info = sample_reference_front(BenchmarkSpec("DTLZ1", 3, 10))
    assert info["size"] == 1000 and not info["approximate"]
    np.testing.assert_allclose(Z1.sum(axis=1), 0.5, atol=1e-12)
    Z2, _ = sample_reference_front(BenchmarkSpec("DTLZ2", 3, 10))
    np.testing.assert_allclose(np.sum(Z2**2, axis=1), 1.0, atol=1e-12)


def _mutually_nondominated(Z):
    le = np.all(Z[:, None, :] <= Z[None, :, :], axis=2)
    lt = np.any(Z[:, None, :] < Z[None, :, :], axis=2)
    dom = le & lt
    return not dom.any()


def test_dtlz7_front_nondominated():
    Z, info = sample_reference_front(BenchmarkSpec("DTLZ7", 3, 10))
    assert Z.shape == (1000, 3)
    assert _mutually_nondominated(Z)


@pytest.mark.parametrize("fam", ["DTLZ5", "DTLZ6"])
def test_degenerate_curve_fronts(fam):
    Z, info = sample_reference_front(BenchmarkSpec(fam, 3, 10), count=300)
    np.testing.assert_allclose(np.sum(Z**2, axis=1), 1.0, atol=1e-12)
    assert _mutually_nondominated(Z)
    assert info["method"] == "analytic"


@pytest.mark.parametrize("fam", WFG)
def test_wfg_front_scaling(fam):
    m = 3
    spec = BenchmarkSpec(fam, m, 10)
    Z, _ = sample_reference_front(spec, count=300)
    assert Z.shape == (300, m)
    assert np.all(Z <= 2.0 * np.arange(1, m + 1) + 1e-9)
    assert np.all(Z >= -1e-12)
    assert nondominated_mask(Z).all()


@pytest.mark.parametrize("fam", ["WFG4", "WFG1"])
def test_wfg_front_points_are_attainable(fam):
    # a front point built from the shape functions must be non-dominated by random feasible samples
    spec = BenchmarkSpec(fam, 2, 10)
    Z, _ = sample_reference_front(spec, count=200)
    p = make_problem(spec)
    F = p.batch(_random_inputs(p, 2000, 1))
    dominated = np.all(F[:, None, :] <= Z[None, :, :] - 1e-9, axis=2)
    assert not dominated.any()


def test_front_determinism():
    a, _ = sample_reference_front(BenchmarkSpec("WFG2", 3, 10), count=200, seed=4)
    b, _ = sample_reference_front(BenchmarkSpec("WFG2", 3, 10), count=200, seed=4)
    np.testing.assert_array_equal(a, b)


def test_farthest_point_subset_size():
    P = np.random.default_rng(0).random((500, 3))
    S = farthest_point_subset(P, 50)
    assert S.shape == (50, 3)
    assert len(np.unique(S, axis=0)) == 50
    assert farthest_point_subset(P[:10], 50).shape == (10, 3)


@pytest.mark.parametrize("fam", DTLZ)
def test_dtlz_spec_error_for_small_d(fam):
    with pytest.raises(BenchmarkSpecError):
        BenchmarkSpec(fam, 4, 3)
