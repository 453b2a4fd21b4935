import numpy as np
import pytest

from sdavs.dataset import LabeledMatrix


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_data(rng, counts=(10, 12), d=5, shift=0.0):
    """Gaussian classes; class k is shifted by ``k * shift`` on every feature."""
    y = np.repeat(np.arange(1, len(counts) + 1), counts)
    X = rng.standard_normal((y.size, d)) + shift * (y[:, None] - 1)
    return LabeledMatrix(X, y)


def lcm_oracle(values):
    """Least concave majorant of the ECDF by exhaustive upper-hull search.

    Returns breakpoints and slopes; values must be positive.
    """
    u, c = np.unique(values, return_counts=True)
    xs = np.concatenate([[0.0], u])
    F = np.concatenate([[0.0], np.cumsum(c) / c.sum()])
    knots, slopes, i = [], [], 0
    while i < len(xs) - 1:
        best_j, best_s = None, -np.inf
        for j in range(i + 1, len(xs)):
            s = (F[j] - F[i]) / (xs[j] - xs[i])
            if s >= best_s - 1e-15:
                best_j, best_s = j, s
        knots.append(xs[best_j])
        slopes.append(best_s)
        i = best_j
    return np.array(knots), np.array(slopes)
