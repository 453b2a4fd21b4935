import warnings

import numpy as np
import pytest
from scipy import stats

from sdavs.dataset import LabeledMatrix
from sdavs.effectsize import estimate_effects
from sdavs.scores import compute_scores
from sdavs.selection import (misclassification_rate, mr_curve, select_features, select_fndr,
                             select_hc, select_mr, top_features)
from sdavs.shrinkage import fit_model_params


def mc_error(w_pair, priors, draws, rng):
    """Classify draws from N(mu_k, I) with the true LDA rule in decorrelated space."""
    K = len(priors)
    d = len(next(iter(w_pair.values())))
    mu = np.zeros((K, d))
    for k in range(1, K):
        mu[k] = -w_pair[(0, k)]
    labels = rng.choice(K, size=draws, p=priors)
    X = mu[labels] + rng.standard_normal((draws, d))
    score = X @ mu.T - 0.5 * np.sum(mu**2, axis=1) + np.log(priors)
    return np.mean(np.argmax(score, axis=1) != labels)


def test_two_class_reference():
    rate = misclassification_rate({(0, 1): np.array([2.0, 0.0, 0.0])}, [0.5, 0.5])
    assert rate == pytest.approx(stats.norm.cdf(-1.0), abs=1e-12)
    err = mc_error({(0, 1): np.array([2.0, 0.0, 0.0])}, np.array([0.5, 0.5]), 100_000,
                   np.random.default_rng(0))
    assert abs(err - rate) < 3 * np.sqrt(rate * (1 - rate) / 100_000)


def test_zero_effect_limits():
    z = {(0, 1): np.zeros(3)}
    assert misclassification_rate(z, [0.5, 0.5]) == 0.5
    assert misclassification_rate(z, [0.9, 0.1]) == pytest.approx(0.1)


def test_priors_checked():
    with pytest.raises(ValueError):
        misclassification_rate({(0, 1): np.ones(2)}, [0.5, 0.6])


def test_curve_examples():
    w = {(0, 1): np.array([4.0, 0.0, 1.0])}
    curve = mr_curve(np.array([0, 1, 2]), w, [0.5, 0.5])
    assert curve[0] == pytest.approx(stats.norm.cdf(-2.0))
    assert curve[1] == curve[0]
    assert np.all((curve >= 0) & (curve <= 1))


def test_curve_non_increasing_equal_priors():
    rng = np.random.default_rng(3)
    w_pool = rng.normal(0, 0.5, (3, 40))
    w_pair = {(k, l): w_pool[k] - w_pool[l] for k in range(3) for l in range(k + 1, 3)}
    curve = mr_curve(rng.permutation(40), w_pair, np.full(3, 1 / 3))
    assert np.all(np.diff(curve) <= 1e-15)


def test_select_mr_examples():
    assert select_mr(np.array([0.02, 0.01])) == 1
    assert select_mr(np.array([0.3, 0.2, 0.1])) == 3
    assert select_mr(np.array([0.3, 0.04, 0.01]), alpha=0.05) == 2


def test_hc_examples():
    d = 1000
    p = np.linspace(0.001, 1, d)
    p[500] = 1e-12
    assert select_hc(p)[0] == 1
    grid = np.arange(1, d + 1) / (d + 1)
    t, diag = select_hc(grid)
    assert t == 100 and diag["no_signal"]
    with pytest.raises(ValueError):
        select_hc(np.ones(5))


def test_hc_tie_order_irrelevant():
    rng = np.random.default_rng(1)
    p = np.round(rng.random(200), 2)
    assert select_hc(p)[0] == select_hc(rng.permutation(p))[0]


def test_fndr_examples():
    assert select_fndr(np.array([0.1, 0.5, 0.85])).tolist() == [0, 1]
    assert select_fndr(np.ones(4)).size == 0
    assert select_fndr(np.array([0.2, 1.0]), cutoff=1.0).tolist() == [0, 1]


def test_ties_at_boundary_included():
    S = np.array([5.0, 3.0, 3.0, 1.0])
    ranking = np.array([0, 1, 2, 3])
    assert top_features(S, ranking, 2).tolist() == [0, 1, 2]


def test_pure_noise_falls_back():
    rng = np.random.default_rng(2)
    data = LabeledMatrix(rng.standard_normal((40, 100)), np.repeat([1, 2], 20))
    p = fit_model_params(data, diagonal=True)
    sc = compute_scores(p)
    ef = estimate_effects(sc, "fdr-effect")
    with pytest.warns(RuntimeWarning, match="not reached"):
        res = select_features(sc, ef, p.priors, "mr")
    assert res.t_star == 100 and res.diagnostics["fallback"] == "all"


def test_fndr_fallback_and_methods():
    rng = np.random.default_rng(4)
    data = LabeledMatrix(rng.standard_normal((30, 60)), np.repeat([1, 2, 3], 10))
    p = fit_model_params(data, diagonal=True)
    sc = compute_scores(p)
    ef = estimate_effects(sc, "naive")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for m in ("mr", "hc", "fndr", "all"):
            res = select_features(sc, ef, p.priors, m)
            assert 1 <= res.t_star <= 60
            assert len(res.selected) >= res.t_star
    with pytest.raises(ValueError):
        select_features(sc, ef, p.priors, "pam")
