"""Synthetic benchmark data.

All draws use ``numpy.random.default_rng`` (PCG64) seeded with the given
integer, so a seed reproduces the same data on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag

from .dataset import LabeledMatrix
from .linalg import corr_inv_sqrt


def gen_block_corr(blocks: int, size: int, base: float = 0.9) -> np.ndarray:
    """Block-diagonal correlation with AR(1) blocks ``base**|i-j|``."""
    if not 0 <= base < 1:
        raise ValueError("base must lie in [0, 1)")
    lag = np.abs(np.subtract.outer(np.arange(size), np.arange(size)))
    return block_diag(*[base**lag] * blocks) if blocks else np.zeros((0, 0))


def _sym_sqrt(P: np.ndarray) -> np.ndarray:
    evals, evecs = np.linalg.eigh(P)
    return (evecs * np.sqrt(np.maximum(evals, 0))) @ evecs.T


@dataclass
class SimSpec:
    """Gaussian class model ``N(mean_k, V^{1/2} P V^{1/2})``.

    ``correlation`` is None for independence, otherwise ``(block_size, base)``.
    """

    means: np.ndarray
    variances: np.ndarray
    priors: np.ndarray
    correlation: tuple | None = None
    de_index: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    @property
    def d(self) -> int:
        return self.means.shape[1]

    @property
    def n_classes(self) -> int:
        return self.means.shape[0]

    def __post_init__(self):
        self.means = np.atleast_2d(np.asarray(self.means, dtype=float))
        self.variances = np.asarray(self.variances, dtype=float)
        self.priors = np.asarray(self.priors, dtype=float)
        if self.correlation is not None and self.d % self.correlation[0]:
            raise ValueError("block size must divide the number of features")

    def block(self) -> np.ndarray | None:
        if self.correlation is None:
            return None
        size, base = self.correlation
        return gen_block_corr(1, size, base)

    def corr_matrix(self) -> np.ndarray:
        if self.correlation is None:
            return np.eye(self.d)
        size, base = self.correlation
        return gen_block_corr(self.d // size, size, base)

    def true_effects(self) -> np.ndarray:
        """Pairwise effects ``P^{-1/2} V^{-1/2} (mu_k - mu_l)``, shape (K, K, d)."""
        std = self.means / np.sqrt(self.variances)
        diff = std[:, None, :] - std[None, :, :]
        blk = self.block()
        if blk is None:
            return diff
        M = corr_inv_sqrt(blk)
        size = blk.shape[0]
        shaped = diff.reshape(self.n_classes, self.n_classes, -1, size)
        return (shaped @ M).reshape(diff.shape)

    def draw(self, labels: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        noise = rng.standard_normal((labels.size, self.d))
        blk = self.block()
        if blk is not None:
            L = np.linalg.cholesky(blk)
            size = blk.shape[0]
            noise = (noise.reshape(labels.size, -1, size) @ L.T).reshape(labels.size, self.d)
        return self.means[labels] + noise * np.sqrt(self.variances)

    def sample(self, n: int, rng: np.random.Generator, balanced: bool = False) -> LabeledMatrix:
        """Draw ``n`` samples; balanced splits ``n`` as evenly as possible over classes."""
        K = self.n_classes
        if balanced:
            labels = np.repeat(np.arange(K), n // K + (np.arange(K) < n % K))
        else:
            labels = np.sort(rng.choice(K, size=n, p=self.priors))
        return LabeledMatrix(self.draw(labels, rng), labels + 1)


def setup1_spec(d: int = 500, n_de_per_class: int = 25, effect: float = 0.7) -> SimSpec:
    """Four equiprobable classes, unit variances, no correlation; class ``k``
    is shifted by ``effect`` on its own block of ``n_de_per_class`` features."""
    K = 4
    means = np.zeros((K, d))
    for k in range(K):
        means[k, k * n_de_per_class:(k + 1) * n_de_per_class] = effect
    return SimSpec(means, np.ones(d), np.full(K, 1 / K),
                   de_index=np.arange(K * n_de_per_class))


def setup2_spec(d: int = 500, n_de: int = 200, effect: float = 0.6,
                block_size: int = 100, base: float = 0.9) -> SimSpec:
    """Two equiprobable classes with AR(1) block correlation; class 2 is shifted
    so that the decorrelated effect equals ``effect`` on the first ``n_de``
    features and zero elsewhere."""
    omega = np.zeros(d)
    omega[:n_de] = effect
    half = _sym_sqrt(gen_block_corr(1, block_size, base))
    shift = (omega.reshape(-1, block_size) @ half).ravel()
    means = np.vstack([np.zeros(d), shift])
    return SimSpec(means, np.ones(d), np.array([0.5, 0.5]), (block_size, base),
                   de_index=np.arange(n_de))


def gen_setup1(seed: int, n_train: int = 100, n_test: int = 1000):
    rng = np.random.default_rng(seed)
    spec = setup1_spec()
    return spec.sample(n_train, rng, balanced=True), spec.sample(n_test, rng)


def gen_setup2(seed: int, n_train: int = 100, n_test: int = 1000):
    rng = np.random.default_rng(seed)
    spec = setup2_spec()
    return spec.sample(n_train, rng, balanced=True), spec.sample(n_test, rng)


@dataclass
class SmythData:
    train: LabeledMatrix
    true_effect: np.ndarray
    de_index: np.ndarray
    spec: SimSpec


def smyth_spec(rng: np.random.Generator, d: int = 1000, n_de: int = 200, v0: float = 0.3,
               d0: float = 1.0, s0sq: float = 1.0, block_size: int | None = 100,
               base: float = 0.9) -> SimSpec:
    """Gene-wise variances ``d0 * s0sq / chi2(d0)``; the first ``n_de`` genes get a
    mean difference drawn from ``N(0, v0 * sigma_i^2)`` (class 2 minus class 1)."""
    variances = d0 * s0sq / rng.chisquare(d0, size=d)
    diff = np.zeros(d)
    diff[:n_de] = rng.normal(0.0, np.sqrt(v0 * variances[:n_de]))
    means = np.vstack([np.zeros(d), diff])
    corr = None if block_size is None else (block_size, base)
    return SimSpec(means, variances, np.array([0.5, 0.5]), corr, de_index=np.arange(n_de))


def gen_smyth(seed: int, n_per_class: int = 8, **kwargs) -> SmythData:
    """Two-class gene-expression style data with known true effects ``omega^(1,2)``."""
    rng = np.random.default_rng(seed)
    spec = smyth_spec(rng, **kwargs)
    train = spec.sample(2 * n_per_class, rng, balanced=True)
    return SmythData(train, spec.true_effects()[0, 1], spec.de_index, spec)


def prostate_like_spec(d: int = 6033, n_de: int = 300, v0: float = 0.3,
                       seed: int = 0) -> SimSpec:
    """Stand-in with the shape of the prostate data (d = 6033, K = 2, 52 vs 50)."""
    rng = np.random.default_rng(seed)
    spec = smyth_spec(rng, d=d, n_de=n_de, v0=v0, d0=4.0, s0sq=1.0, block_size=None)
    spec.priors = np.array([52, 50]) / 102
    return spec


def gen_prostate_like(seed: int = 0) -> LabeledMatrix:
    spec = prostate_like_spec(seed=seed)
    rng = np.random.default_rng(seed + 1)
    labels = np.repeat([0, 1], [52, 50])
    return LabeledMatrix(spec.draw(labels, rng), labels + 1,
                         [f"g{j + 1}" for j in range(spec.d)])
