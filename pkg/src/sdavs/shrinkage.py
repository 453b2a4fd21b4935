"""James-Stein-type estimates of the LDA model parameters.

Class means are plain averages.  Variances, correlations and class
frequencies are each shrunk toward a simple target with an analytically
chosen intensity ``lambda`` in [0, 1]:

* variances toward their median,
* correlations toward zero (ridge),
* class frequencies toward the uniform distribution.

All second moments come from class-centered (pooled) residuals with the
unbiased denominator ``n - K``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import LabeledMatrix
from .exceptions import DataValidationError
from .linalg import ShrunkCorrelation

SCHEMA_VERSION = 1


def _clip01(num: float, den: float) -> float:
    if den <= 0:
        return 1.0
    return float(min(1.0, max(0.0, num / den)))


def estimate_means(data: LabeledMatrix):
    """Per-class means ``(K, d)`` and the count-weighted pooled mean ``(d,)``."""
    K, counts = data.n_classes, data.counts
    mu = np.zeros((K, data.n_features))
    np.add.at(mu, data.y - 1, data.X)
    mu /= counts[:, None]
    mu_pool = (counts / counts.sum()) @ mu
    return mu, mu_pool


def _residuals(data: LabeledMatrix) -> np.ndarray:
    n, K = data.n_samples, data.n_classes
    if n <= K:
        raise DataValidationError(f"n = {n} samples leave no residual degrees of freedom for K = {K}")
    mu, _ = estimate_means(data)
    return data.X - mu[data.y - 1]


def _pooled_moments(R: np.ndarray, K: int):
    """Unbiased pooled variances and the estimated variance of each."""
    n = R.shape[0]
    w = R**2
    wbar = w.mean(axis=0)
    scale = n / (n - K)
    vhat = scale * wbar
    var_vhat = scale**2 * ((w - wbar) ** 2).sum(axis=0) / (n * (n - 1))
    return vhat, var_vhat


def estimate_variances_shrunk(data: LabeledMatrix, lambda_var: float | None = None):
    """Shrink pooled variances toward their median.

    Returns
    -------
    v : ndarray of shape (d,)
    lambda_var : float
    """
    R = _residuals(data)
    vhat, var_vhat = _pooled_moments(R, data.n_classes)
    target = np.median(vhat)
    if lambda_var is None:
        lambda_var = _clip01(var_vhat.sum(), ((vhat - target) ** 2).sum())
    v = lambda_var * target + (1.0 - lambda_var) * vhat
    if np.any(v <= 0):
        raise DataValidationError("all features are constant within classes; variances are zero")
    return v, float(lambda_var)


def estimate_correlation_shrunk(data: LabeledMatrix, lambda_corr: float | None = None):
    """Ridge-shrink the pooled correlation matrix toward the identity.

    The intensity is the ratio of the summed estimated variances of the
    off-diagonal sample correlations to their summed squares.  Everything is
    computed from the ``n x d`` standardized residuals, so the ``d x d``
    matrix is never formed here.

    Returns
    -------
    corr : ShrunkCorrelation
    lambda_corr : float
    """
    R = _residuals(data)
    n, d = R.shape
    K = data.n_classes
    vhat, _ = _pooled_moments(R, K)
    sd = np.sqrt(vhat)
    live = sd > 0
    Xs = np.zeros_like(R)
    Xs[:, live] = R[:, live] / sd[live]

    if lambda_corr is None:
        if d == 1:
            lambda_corr = 1.0
        else:
            sq = Xs**2
            row_sq = sq.sum(axis=1)
            gram = Xs @ Xs.T if n <= d else Xs.T @ Xs
            frob = float((gram**2).sum())  # ||Xs^T Xs||_F^2
            diag_wbar = sq.mean(axis=0)
            sum_w2 = float((row_sq**2).sum() - (sq**2).sum())
            sum_wbar2 = frob / n**2 - float((diag_wbar**2).sum())
            scale = n / (n - K)
            var_r = scale**2 * (sum_w2 - n * sum_wbar2) / (n * (n - 1))
            r2 = scale**2 * sum_wbar2
            lambda_corr = _clip01(var_r, r2)
    return ShrunkCorrelation(lambda_corr, factor=Xs / np.sqrt(n - K)), float(lambda_corr)


def estimate_priors(data: LabeledMatrix, lambda_freq: float | None = None):
    """Shrink class frequencies toward ``1/K``.

    Returns
    -------
    priors : ndarray of shape (K,)
    lambda_freq : float
    """
    counts = data.counts
    n, K = counts.sum(), len(counts)
    if K < 2:
        raise DataValidationError("at least two classes are required")
    freq = counts / n
    target = np.full(K, 1.0 / K)
    if lambda_freq is None:
        lambda_freq = _clip01(1.0 - (freq**2).sum(), (n - 1) * ((target - freq) ** 2).sum())
    priors = lambda_freq * target + (1.0 - lambda_freq) * freq
    return priors / priors.sum(), float(lambda_freq)


@dataclass
class ModelParams:
    """Estimated parameters of the LDA model.

    ``corr`` is None for the diagonal model (identity correlation).
    """

    means: np.ndarray
    pooled_mean: np.ndarray
    variances: np.ndarray
    corr: ShrunkCorrelation | None
    priors: np.ndarray
    counts: np.ndarray
    lambdas: dict = field(default_factory=dict)
    classes: list = field(default_factory=list)
    feature_names: list | None = None

    @property
    def diagonal(self) -> bool:
        return self.corr is None

    @property
    def n_classes(self) -> int:
        return self.means.shape[0]

    @property
    def n_features(self) -> int:
        return self.means.shape[1]

    def to_dict(self, features=None) -> dict:
        """JSON-ready representation, optionally restricted to a feature subset."""
        idx = np.arange(self.n_features) if features is None else np.asarray(features)
        doc = {
            "schema": "sdavs.model_params",
            "version": SCHEMA_VERSION,
            "classes": [str(c) for c in self.classes],
            "counts": [int(c) for c in self.counts],
            "priors": self.priors.tolist(),
            "lambdas": {k: (None if v is None else float(v)) for k, v in self.lambdas.items()},
            "features": idx.tolist(),
            "feature_names": None if self.feature_names is None
            else [self.feature_names[i] for i in idx],
            "means": self.means[:, idx].tolist(),
            "pooled_mean": self.pooled_mean[idx].tolist(),
            "variances": self.variances[idx].tolist(),
            "diagonal": self.diagonal,
        }
        if not self.diagonal:
            doc["correlation"] = self.corr.submatrix(idx).tolist()
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "ModelParams":
        if doc.get("schema") != "sdavs.model_params":
            raise DataValidationError("not a model-parameter document")
        if doc.get("version") != SCHEMA_VERSION:
            raise DataValidationError(f"unsupported schema version {doc.get('version')}")
        corr = None if doc["diagonal"] else ShrunkCorrelation.from_dense(doc["correlation"])
        return cls(
            means=np.asarray(doc["means"], dtype=float),
            pooled_mean=np.asarray(doc["pooled_mean"], dtype=float),
            variances=np.asarray(doc["variances"], dtype=float),
            corr=corr,
            priors=np.asarray(doc["priors"], dtype=float),
            counts=np.asarray(doc["counts"], dtype=int),
            lambdas=dict(doc.get("lambdas", {})),
            classes=list(doc["classes"]),
            feature_names=doc.get("feature_names"),
        )


def fit_model_params(data: LabeledMatrix, diagonal: bool = False,
                     lambda_var: float | None = None,
                     lambda_corr: float | None = None,
                     lambda_freq: float | None = None) -> ModelParams:
    """Estimate all LDA parameters; fixed ``lambda_*`` values override the estimates."""
    mu, mu_pool = estimate_means(data)
    v, lam_var = estimate_variances_shrunk(data, lambda_var)
    priors, lam_freq = estimate_priors(data, lambda_freq)
    if diagonal:
        corr, lam_corr = None, None
    else:
        corr, lam_corr = estimate_correlation_shrunk(data, lambda_corr)
    return ModelParams(
        means=mu,
        pooled_mean=mu_pool,
        variances=v,
        corr=corr,
        priors=priors,
        counts=data.counts,
        lambdas={"var": lam_var, "corr": lam_corr, "freq": lam_freq},
        classes=data.classes,
        feature_names=data.feature_names,
    )
