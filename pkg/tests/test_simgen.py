import numpy as np
import pytest

from sdavs.simgen import (SimSpec, gen_block_corr, gen_prostate_like, gen_setup1, gen_setup2,
                          gen_smyth, setup2_spec)


def test_block_corr_examples():
    np.testing.assert_allclose(gen_block_corr(1, 2, 0.9), [[1, 0.9], [0.9, 1]])
    np.testing.assert_array_equal(gen_block_corr(3, 4, 0.0), np.eye(12))
    P = gen_block_corr(5, 100, 0.9)
    assert P.shape == (500, 500) and P[99, 100] == 0 and P[0, 2] == pytest.approx(0.81)
    assert np.linalg.eigvalsh(P[:100, :100]).min() > 0
    with pytest.raises(ValueError):
        gen_block_corr(1, 3, 1.0)


def test_setup_shapes_and_effects():
    tr, te = gen_setup1(0)
    assert tr.X.shape == (100, 500) and te.X.shape == (1000, 500)
    assert np.bincount(tr.y)[1:].tolist() == [25, 25, 25, 25]
    tr2, te2 = gen_setup2(0)
    assert tr2.X.shape == (100, 500) and te2.X.shape == (1000, 500)
    omega = setup2_spec().true_effects()[1, 0]
    assert np.count_nonzero(np.abs(omega) > 1e-9) == 200
    np.testing.assert_allclose(omega[:200], 0.6, atol=1e-9)
    other, _ = gen_setup1(1)
    assert other.X.shape == tr.X.shape and not np.array_equal(other.X, tr.X)


def test_determinism():
    a, _ = gen_setup2(5)
    b, _ = gen_setup2(5)
    np.testing.assert_array_equal(a.X, b.X)
    np.testing.assert_array_equal(gen_smyth(3).train.X, gen_smyth(3).train.X)


def test_smyth_generator():
    sim = gen_smyth(0)
    assert sim.train.X.shape == (16, 1000)
    assert np.count_nonzero(sim.true_effect) <= 200
    assert np.count_nonzero(sim.true_effect[200:]) == 0
    mags = np.abs(sim.true_effect[:200])
    assert mags.min() > 0 and np.mean((mags > 1) & (mags <= 3)) > 0.05
    zero = gen_smyth(0, v0=0.0)
    assert np.all(zero.true_effect == 0)


def test_sample_moments_converge():
    rng = np.random.default_rng(0)
    spec = SimSpec(np.array([[0.0, 1.0, 0.0, 0.0], [2.0, 0.0, 0.0, 0.0]]),
                   np.array([1.0, 4.0, 0.5, 2.0]), np.array([0.5, 0.5]), (2, 0.9))
    n = 10_000
    data = spec.sample(2 * n, rng, balanced=True)
    for k in range(2):
        Xk = data.X[data.y == k + 1]
        assert np.all(np.abs(Xk.mean(0) - spec.means[k]) <= 4 * np.sqrt(spec.variances / n))
        sd = np.sqrt(spec.variances)
        cov = spec.corr_matrix() * np.outer(sd, sd)
        np.testing.assert_allclose(np.cov(Xk.T), cov, atol=0.1)


def test_prostate_like_shape():
    data = gen_prostate_like(0)
    assert data.X.shape == (102, 6033)
    assert np.bincount(data.y)[1:].tolist() == [52, 50]
