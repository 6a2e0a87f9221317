import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sbpbo import ensemble as ens
from sbpbo import gp
from sbpbo.gp import GpTrainingSet
from sbpbo.kernels import nondominated_mask

D = 4


def _f(U):
    return np.column_stack([U.sum(axis=1), (1 - U).sum(axis=1), (U[:, 0] - 0.3) ** 2 + U[:, 1]])


def _design(n, seed=0):
    U = np.random.default_rng(seed).random((n, D))
    return U, _f(U)


def _extra(n, j, seed=1):
    U = np.random.default_rng(seed).random((n, D))
    return GpTrainingSet(U, _f(U)[:, j])


def _bank(mode=ens.ENSEMBLE, n=30, extra=None):
    U, F = _design(n)
    extra = {0: _extra(20, 0), 1: _extra(20, 1, 2)} if extra is None else extra
    return ens.initialize_bank(U, F, extra, (0, 1), (2,), cap=ens.training_cap(D), mode=mode,
                               options=ens.GpOptions(restarts=1))


def test_training_cap():
    assert ens.training_cap(10) == 134


def test_bank_model_count():
    bank = _bank()
    assert bank.model_count() == 5
    mu, sd = bank.predict(np.random.default_rng(5).random((7, D)))
    assert mu.shape == sd.shape == (7, 3)
    assert np.all(sd >= 0)


def test_frozen_member_falls_back_to_design_column():
    U, F = _design(30)
    bank = ens.initialize_bank(U, F, {0: None, 1: GpTrainingSet(np.empty((0, D)), np.empty(0))},
                               (0, 1), (2,), cap=134, options=ens.GpOptions(restarts=1))
    for j in (0, 1):
        np.testing.assert_array_equal(bank.cheap_frozen_models[j].training.targets, F[:, j])


def test_combine_examples():
    mean, std = ens.combine(2.0, 1.0, 4.0, 3.0)
    assert abs(mean - 2.5) <= 1e-15 and std == 1.0
    mean, _ = ens.combine(2.0, 0.7, 4.0, 0.7)
    assert abs(mean - 3.0) <= 1e-15
    mean, std = ens.combine(2.0, 0.5, 4.0, 0.0)
    assert mean == 4.0 and std == 0.0
    mean, _ = ens.combine(2.0, 0.0, 4.0, 0.0)
    assert mean == 3.0


@given(st.floats(-1e3, 1e3), st.floats(0, 1e3), st.floats(-1e3, 1e3), st.floats(0, 1e3))
def test_ensemble_convexity(m1, s1, m2, s2):
    a, b = ens.ensemble_weights(s1, s2)
    assert 0 <= a <= 1 and 0 <= b <= 1
    assert abs(a + b - 1) <= 1e-12
    mean, _ = ens.combine(m1, s1, m2, s2)
    assert min(m1, m2) - 1e-9 <= mean <= max(m1, m2) + 1e-9


def test_identical_members_reduce_to_single_model():
    bank = _bank()
    model = bank.cheap_updated_models[0]
    twin = ens.SurrogateBank(cheap=(0,), expensive=(1,), cap=134, cheap_updated_models={0: model},
                             cheap_frozen_models={0: model})
    X = np.random.default_rng(9).random((5, D))
    np.testing.assert_allclose(ens.ensemble_predict(twin, 0, X)[0], gp.predict(model, X)[0], atol=1e-12)
    np.testing.assert_allclose(ens.ensemble_predict(twin, 0, X)[1], gp.predict(model, X)[1], atol=1e-12)


def test_subset_identity_below_cap():
    U, F = _design(100)
    np.testing.assert_array_equal(ens.select_training_subset(U, F, 134), np.arange(100))


def test_subset_cap_keeps_newest():
    U, F = _design(200)
    newest = [197, 198, 199]
    idx = ens.select_training_subset(U, F, 134, newest=newest)
    assert len(idx) == 134 and len(set(idx)) == 134
    assert set(newest) <= set(idx)
    nd = set(np.flatnonzero(nondominated_mask(F))) - set(newest)
    if len(nd) <= 134 - 3:
        assert nd <= set(idx)
    else:
        assert set(idx) - set(newest) <= nd


@given(st.integers(1, 250), st.integers(1, 150), st.integers(0, 1000))
def test_subset_size_property(n, cap, seed):
    U, F = _design(n, seed)
    idx = ens.select_training_subset(U, F, cap, newest=[n - 1], seed=seed)
    assert len(idx) == min(n, cap)
    assert len(set(idx.tolist())) == len(idx)


def test_cluster_representatives_exact_count():
    U = np.vstack([np.zeros((50, 2)), np.ones((50, 2)), np.random.default_rng(0).random((10, 2))])
    reps = ens.cluster_representatives(U, 20, seed=3)
    assert len(reps) == 20 and len(set(reps.tolist())) == 20


def test_identical_points_fail_upstream():
    U = np.full((5, D), 0.5)
    F = _f(U)
    with pytest.raises(gp.GpFitError):
        ens.initialize_bank(U, F, {}, (0, 1), (2,), cap=134, options=ens.GpOptions(restarts=1))


def test_update_keeps_frozen_and_adds_cheap_samples():
    bank = _bank()
    before = {j: m.params_fingerprint() for j, m in bank.cheap_frozen_models.items()}
    U, F = _design(40, seed=3)
    new = {0: _extra(12, 0, 7), 1: _extra(12, 1, 8)}
    bank2 = ens.update_bank(bank, U, F, new, seed=1)
    assert {j: m.params_fingerprint() for j, m in bank2.cheap_frozen_models.items()} == before
    assert bank2.cheap_frozen_models[0] is bank.cheap_frozen_models[0]
    assert len(bank2.cheap_updated_models[0].training) == 40 + 12
    assert len(bank2.expensive_models[2].training) == 40
    bank3 = ens.update_bank(bank2, U, F, {0: _extra(12, 0, 9), 1: _extra(12, 1, 10)}, seed=2)
    assert len(bank3.cheap_updated_models[1].training) == 40 + 24


def test_accumulated_cheap_samples_are_capped():
    prev = _extra(130, 0, 1)
    merged = ens.accumulate_extra(prev, _extra(12, 0, 2), cap=134)
    assert len(merged) == 134
    np.testing.assert_array_equal(merged.inputs[-12:], _extra(12, 0, 2).inputs)


@pytest.mark.parametrize("mode", [ens.SINGLE_RANDOM, ens.SINGLE_CLUSTER])
def test_single_gp_variants_use_cap_sized_subsets(mode):
    U, F = _design(100)
    extra = {0: _extra(100, 0, 4), 1: _extra(100, 1, 5)}
    cap = 60
    bank = ens.initialize_bank(U, F, extra, (0, 1), (2,), cap=cap, mode=mode,
                               options=ens.GpOptions(restarts=1))
    assert bank.model_count() == 3
    assert bank.training_sizes() == {0: cap, 1: cap, 2: cap}


def test_true_cheap_mode_calls_evaluator():
    U, F = _design(30)
    bank = ens.initialize_bank(U, F, {}, (0, 1), (2,), cap=134, mode=ens.TRUE_CHEAP,
                               options=ens.GpOptions(restarts=1))
    assert bank.model_count() == 1
    X = np.random.default_rng(2).random((4, D))
    mu, sd = bank.predict(X, cheap_values=lambda U, j: _f(U)[:, j])
    np.testing.assert_array_equal(mu[:, :2], _f(X)[:, :2])
    np.testing.assert_array_equal(sd[:, :2], 0.0)
