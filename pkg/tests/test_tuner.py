import pytest
from hypothesis import given
from hypothesis import strategies as st

from freqpoison.errors import ConfigError
from freqpoison.tuner import TunerConfig, tune_K

CFG = TunerConfig()


def linear(K):
    return 60 - 0.5 * K


def tune_curve(curve, cfg=CFG):
    calls = []

    def render(K):
        calls.append(K)
        return K

    result = tune_K(None, render, cfg, metric=lambda _clean, K: curve(K))
    return result, calls


def test_linear_oracle_lands_in_analytic_interval():
    (K, value, n), _ = tune_curve(linear)
    assert 36 < K < 40 and 40 < value < 42 and n <= 20


@pytest.mark.parametrize("first", [39.0, 41.0])
def test_early_stop_at_k_min(first):
    (K, value, n), calls = tune_curve(lambda K: first)
    assert (K, value, n) == (CFG.k_min, first, 1)
    assert calls == [CFG.k_min]


def test_boundary_value_counts_as_too_visible():
    # at K_max the linear curve sits exactly on p0; the search must move left
    (K, value, _), calls = tune_curve(linear)
    assert calls[:2] == [CFG.k_min, CFG.k_max]
    assert calls[2] < CFG.k_max


def test_invisible_everywhere_exhausts_near_k_max():
    (K, value, n), calls = tune_curve(lambda K: 50.0)
    assert n == CFG.max_iter
    assert K > CFG.k_max - 1e-3
    assert len(calls) == CFG.max_iter + 1


@given(st.floats(0.01, 5), st.floats(45, 80))
def test_contract_on_monotone_curves(slope, intercept):
    (K, value, n), _ = tune_curve(lambda K: intercept - slope * K)
    assert CFG.k_min <= K <= CFG.k_max
    assert CFG.in_band(value) or K == CFG.k_min or n == CFG.max_iter


def test_deterministic():
    assert tune_curve(linear)[0] == tune_curve(linear)[0]


@pytest.mark.parametrize("kw", [dict(p0=42, p1=40), dict(k_min=0), dict(k_min=5, k_max=1), dict(max_iter=0)])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        TunerConfig(**kw)
