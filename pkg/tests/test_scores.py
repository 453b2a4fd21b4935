import numpy as np
import pytest
from scipy import stats

from sdavs.linalg import ShrunkCorrelation, corr_inv_sqrt
from sdavs.exceptions import NumericalError
from sdavs.scores import (cat_scale_pool, compute_scores, pair_effect, rank_features,
                          summary_statistic)
from sdavs.shrinkage import fit_model_params

from conftest import make_data


def test_cat_equals_pooled_t(rng):
    data = make_data(rng, (9, 13), d=30, shift=0.4)
    p = fit_model_params(data, diagonal=True, lambda_var=0.0)
    sc = compute_scores(p)
    t = stats.ttest_ind(data.X[data.y == 1], data.X[data.y == 2], equal_var=True).statistic
    np.testing.assert_allclose(sc.cat_pair[(0, 1)], t, atol=1e-10)


def test_pair_is_difference_of_pool(rng):
    p = fit_model_params(make_data(rng, (6, 7, 8), d=5, shift=0.3))
    sc = compute_scores(p)
    for (k, l), w in sc.w_pair.items():
        np.testing.assert_allclose(w, sc.w_pool[k] - sc.w_pool[l], atol=1e-14)
    np.testing.assert_array_equal(pair_effect(sc.w_pair, 2, 0), -sc.w_pair[(0, 2)])
    assert not pair_effect(sc.w_pair, 1, 1).any()


def test_weights_use_inverse_sqrt(rng):
    p = fit_model_params(make_data(rng, (6, 7), d=4, shift=0.3))
    sc = compute_scores(p)
    M = corr_inv_sqrt(p.corr.matrix)
    centered = (p.means - p.pooled_mean) / np.sqrt(p.variances)
    np.testing.assert_allclose(sc.w_pool, centered @ M, atol=1e-12)


def test_summary_and_ranking():
    cat = np.array([[1.0, -3.0, 2.0, 0.0], [0.0, 1.0, -2.0, 3.0]])
    S = summary_statistic(cat)
    assert S.tolist() == [1.0, 10.0, 8.0, 9.0]
    assert rank_features(S).tolist() == [1, 3, 2, 0]
    assert rank_features(np.array([2.0, 5.0, 2.0, 5.0])).tolist() == [1, 3, 0, 2]


def test_pool_scale_needs_two_classes():
    with pytest.raises(ValueError):
        cat_scale_pool(np.ones((1, 3)), [5])


def test_inv_sqrt_identity_and_errors():
    assert corr_inv_sqrt(None) is None
    np.testing.assert_allclose(corr_inv_sqrt(np.eye(3)), np.eye(3))
    with pytest.raises(NumericalError):
        corr_inv_sqrt(np.array([[1.0, 2.0], [2.0, 1.0]]))
    M = corr_inv_sqrt(np.array([[1.0, 0.5], [0.5, 1.0]]))
    np.testing.assert_allclose(M @ M @ np.array([[1.0, 0.5], [0.5, 1.0]]), np.eye(2), atol=1e-12)


def test_low_rank_path_matches_dense(rng):
    F = rng.standard_normal((20, 450))
    F /= np.linalg.norm(F, axis=0)  # unit columns, as for standardized residuals
    F[:, 7] = 0.0  # constant feature
    corr = ShrunkCorrelation(0.3, factor=F)
    B = rng.standard_normal((450, 3))
    dense = corr_inv_sqrt(corr.submatrix()) @ B
    np.testing.assert_allclose(corr.apply_inv_sqrt(B), dense, atol=1e-10)
    idx = np.arange(0, 450, 2)
    dense_sub = corr_inv_sqrt(corr.submatrix(idx)) @ B[idx]
    np.testing.assert_allclose(corr.apply_inv_sqrt(B[idx], idx), dense_sub, atol=1e-10)


def test_low_rank_without_ridge_fails(rng):
    corr = ShrunkCorrelation(0.0, factor=rng.standard_normal((5, 300)))
    with pytest.raises(NumericalError):
        corr.apply_inv_sqrt(np.ones((300, 1)))
