import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from freqpoison.errors import CapacityExceeded, ConfigError, DimensionMismatch, EmptyDataset, NonPositiveGamma
from freqpoison.ntk import (
    KernelDataset, KernelSimConfig, class_scores, kernel_matrix, spatial_sensitivity_experiment, median_gamma,
    multi_target_kernel_asr, nn_median_gamma, ntk_predict, rbf_kernel,
)

SMALL = dict(image_side=16, block_side=4, num_classes=4, n_benign=80, trials=30)


def test_rbf_examples():
    x = np.array([1.0, 2.0, 3.0])
    assert rbf_kernel(x, x, 0.3) == 1.0
    assert rbf_kernel([0.0, 0.0], [1.0, 0.0], 0.5) == pytest.approx(math.exp(-1), abs=1e-9)
    with pytest.raises(DimensionMismatch):
        rbf_kernel([1.0], [1.0, 2.0], 1.0)
    with pytest.raises(NonPositiveGamma):
        rbf_kernel([1.0], [1.0], 0.0)


vecs = arrays(np.float64, 5, elements=st.floats(-10, 10))


@given(vecs, vecs, st.floats(1e-3, 2))
def test_rbf_symmetric_and_bounded(x, y, gamma):
    k = rbf_kernel(x, y, gamma)
    assert k == rbf_kernel(y, x, gamma)
    assert 0 <= k <= 1


def test_kernel_matrix_symmetric_unit_diagonal(rng):
    X = rng.normal(size=(20, 6))
    K = kernel_matrix(X, X, 0.1)
    np.testing.assert_allclose(K, K.T, atol=1e-15)
    np.testing.assert_allclose(np.diag(K), 1.0)
    assert K[2, 7] == pytest.approx(rbf_kernel(X[2], X[7], 0.1), rel=1e-12)


def test_equidistant_query_gives_uniform_scores():
    M = 4
    X = np.eye(M)  # all at distance 1 from the origin
    ds = KernelDataset(X, np.arange(M), np.zeros((0, M)), [], gamma=0.7, num_classes=M)
    np.testing.assert_allclose(class_scores(np.zeros(M), ds), [[0.25] * 4], atol=1e-15)


def _toy(rng):
    benign = rng.normal(size=(20, 8))
    poison = rng.normal(size=(10, 8)) + 3
    return KernelDataset(benign, np.repeat([0, 1], 10), poison, np.zeros(10, dtype=int), gamma=10.0, num_classes=2)


def test_poisoned_point_dominates_its_own_score(rng):
    ds = _toy(rng)
    assert ntk_predict(ds.poison_X[3], ds, target=0) > 0.99


def test_scores_sum_to_one_and_are_order_independent(rng):
    ds = _toy(rng)
    ds.gamma = 0.05
    Q = rng.normal(size=(15, 8))
    S = class_scores(Q, ds)
    np.testing.assert_allclose(S.sum(axis=1), 1.0, atol=1e-12)
    assert ((S > 0) & (S < 1)).all()
    perm = rng.permutation(20)
    shuffled = KernelDataset(ds.benign_X[perm], ds.benign_y[perm], ds.poison_X[::-1], ds.poison_y, 0.05, 2)
    np.testing.assert_allclose(class_scores(Q, shuffled), S, atol=1e-10)
    assert isinstance(ntk_predict(Q[0], ds), float)
    assert ntk_predict(Q, ds).shape == (15,)


def test_dataset_errors():
    with pytest.raises(EmptyDataset):
        KernelDataset(np.zeros((0, 3)), [], np.zeros((0, 3)), [], 1.0, 2)
    with pytest.raises(NonPositiveGamma):
        KernelDataset(np.zeros((2, 3)), [0, 1], np.zeros((0, 3)), [], -1.0, 2)


def test_gamma_policies(rng):
    X = np.vstack([rng.normal(size=(25, 4)) + 100 * k for k in range(4)])
    # the all-pairs median spans the class gap; the neighbour median does not
    assert nn_median_gamma(X, np.random.default_rng(0)) > 100 * median_gamma(X, np.random.default_rng(0))


def test_config_validation():
    with pytest.raises(ConfigError):
        KernelSimConfig(trigger="blur")
    with pytest.raises(ConfigError):
        KernelSimConfig(gamma="mean")
    with pytest.raises(NonPositiveGamma):
        KernelSimConfig(gamma=0.0)
    with pytest.raises(CapacityExceeded):
        spatial_sensitivity_experiment(KernelSimConfig(image_side=8, block_side=4, n_benign=20, trials=2))


def test_small_world_is_deterministic_and_separates():
    a = spatial_sensitivity_experiment(KernelSimConfig(**SMALL))
    b = spatial_sensitivity_experiment(KernelSimConfig(**SMALL))
    assert a == b
    assert a.phi_same > 0.5 > a.phi_shifted
    for v in (a.phi_same, a.phi_shifted, a.phi_clean):
        assert 0 <= v <= 1
    assert a.trial_count == SMALL["trials"]


def test_flat_kernel_limit():
    # every kernel value tends to 1, leaving only the label counts
    cfg = KernelSimConfig(**dict(SMALL, trials=5), gamma=1e-12)
    r = spatial_sensitivity_experiment(cfg)
    expected = (cfg.n_benign / cfg.num_classes + cfg.poison_count) / (cfg.n_benign + cfg.poison_count)
    assert r.phi_same == pytest.approx(expected, abs=1e-3)
    assert r.phi_shifted == pytest.approx(expected, abs=1e-3)


def test_visible_patch_control():
    invisible = spatial_sensitivity_experiment(KernelSimConfig(**SMALL))
    visible = spatial_sensitivity_experiment(KernelSimConfig(**SMALL, trigger="patch"))
    assert visible.phi_same > 0.99
    # a full-contrast patch at the wrong place is far from every poisoned
    # sample, so the target score collapses further than for the invisible one
    assert visible.phi_shifted < invisible.phi_shifted


def test_single_target_matches_same_block_asr():
    cfg = KernelSimConfig(**dict(SMALL, num_classes=2))
    assert multi_target_kernel_asr(cfg, targets=[1]) == {1: spatial_sensitivity_experiment(cfg).asr_same}


def test_multi_target_small_world():
    cfg = KernelSimConfig(**dict(SMALL, num_classes=3, n_benign=60))
    assert multi_target_kernel_asr(cfg) == {1: 1.0, 2: 1.0, 3: 1.0}
    with pytest.raises(CapacityExceeded):
        multi_target_kernel_asr(KernelSimConfig(**dict(SMALL, num_classes=5)))
