import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from sdavs.exceptions import DataValidationError, NumericalError
from sdavs.fdr import FdrModel, PoissonFdr, fit_null_truncated_ml, grenander_density, local_fdr

from conftest import lcm_oracle


def test_three_points_uniform():
    g = grenander_density([1.0, 2.0, 3.0])
    np.testing.assert_allclose(g.pdf([0.5, 1.5, 2.5]), 1 / 3)
    assert g.integral() == pytest.approx(1.0)


def test_identical_values_single_step():
    g = grenander_density([2.0] * 5)
    assert g.slopes.tolist() == [0.5]
    assert g.knots.tolist() == [2.0]


def test_rejects_bad_input():
    with pytest.raises(DataValidationError):
        grenander_density([1.0, np.nan])
    with pytest.raises(DataValidationError):
        grenander_density([-1.0, 2.0])


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(0.01, 10.0), min_size=1, max_size=8))
def test_matches_lcm_oracle(vals):
    vals = np.round(np.asarray(vals), 3)
    g = grenander_density(vals)
    knots, slopes = lcm_oracle(vals)
    edges = np.concatenate([[0.0], knots])
    mids = (edges[:-1] + edges[1:]) / 2
    np.testing.assert_allclose(g.pdf(mids), slopes, rtol=1e-9)
    np.testing.assert_allclose(g.cdf(knots), np.cumsum(slopes * np.diff(edges)), atol=1e-12)


def test_pure_null_recovery():
    rng = np.random.default_rng(7)
    for sigma in (1.0, 2.0):
        z = rng.normal(0, sigma, 10_000)
        s0, eta0, _ = fit_null_truncated_ml(z)
        assert abs(s0 - sigma) <= 0.05 * sigma
        assert eta0 >= 0.95


def test_degenerate_window():
    with pytest.raises(NumericalError):
        fit_null_truncated_ml(np.ones(100))
    with pytest.raises(NumericalError):
        fit_null_truncated_ml(np.arange(5.0))


def test_theoretical_null_fixed_scale():
    z = np.random.default_rng(1).normal(0, 2, 5000)
    s0, _, _ = fit_null_truncated_ml(z, theoretical_null=True)
    assert s0 == 1.0


def test_pure_null_fdr_high():
    z = np.random.default_rng(3).standard_normal(5000)
    m = local_fdr(z)
    assert np.median(m(z)) >= 0.9


def test_mixture_fdr_tails():
    rng = np.random.default_rng(0)
    d = 5000
    alt = rng.random(d) < 0.2
    z = np.where(alt, rng.choice([-5.0, 5.0], d) + rng.standard_normal(d), rng.standard_normal(d))
    m = local_fdr(z)
    assert m(np.array([5.0]))[0] < 0.1
    assert m(np.array([0.0]))[0] > 0.8


def test_fdr_symmetric_monotone_bounded():
    rng = np.random.default_rng(5)
    z = np.concatenate([rng.standard_normal(900), rng.normal(3, 1, 100)])
    m = local_fdr(z)
    grid = np.linspace(0, 8, 400)
    f = m(grid)
    np.testing.assert_array_equal(f, m(-grid))
    assert np.all(np.diff(f) <= 1e-15)
    assert np.all((f >= 0) & (f <= 1))


def test_fdr_zero_density_is_finite():
    g = grenander_density([0.2, 0.5])
    m = FdrModel(1.0, 0.9, 1.0, g)
    out = m(np.array([0.0, 50.0]))
    assert np.all(np.isfinite(out))


def test_model_serializable():
    z = np.random.default_rng(2).standard_normal(200)
    doc = local_fdr(z).to_dict()
    assert {"sigma0", "eta0", "truncation_point", "grenander"} <= set(doc)
    assert set(doc["grenander"]) == {"x_min", "knots", "slopes"}


def test_poisson_fdr_null_flat():
    z = np.random.default_rng(4).standard_normal(10_000)
    m = PoissonFdr(z)
    dens = np.exp(m.log_density(np.array([-1.0, 0.0, 1.0])))
    np.testing.assert_allclose(dens, stats.norm.pdf([-1.0, 0.0, 1.0]), rtol=0.1)
