"""Shrinkage LDA/DDA classifier with effect-size based feature selection."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from scipy.special import softmax
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .dataset import LabeledMatrix
from .effectsize import estimate_effects
from .exceptions import DataValidationError
from .scores import compute_scores
from .selection import select_features
from .shrinkage import SCHEMA_VERSION, ModelParams, fit_model_params


def selected_weights(params: ModelParams, selected) -> tuple[np.ndarray, np.ndarray | None]:
    """Class-vs-pool weights and ``P_S^{-1/2}`` on a feature subset.

    The correlation sub-block of the selected features is inverted afresh, so
    the weights are those of the LDA model on the reduced feature space.
    """
    idx = np.asarray(selected)
    centered = (params.means[:, idx] - params.pooled_mean[idx]) / np.sqrt(params.variances[idx])
    if params.diagonal:
        return centered, None
    M = params.corr.inv_sqrt(idx)
    return centered @ M, M


def discriminant_scores(params: ModelParams, X, selected=None) -> np.ndarray:
    """Scalar-product form ``w_k^T delta_k(x) + log pi_k`` on the selected features."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    idx = np.arange(params.n_features) if selected is None else np.asarray(selected)
    if X.shape[1] != params.n_features:
        raise DataValidationError(f"expected {params.n_features} features, got {X.shape[1]}")
    w, M = selected_weights(params, idx)
    scale = 1 / np.sqrt(params.variances[idx])
    out = np.empty((X.shape[0], params.n_classes))
    for k in range(params.n_classes):
        mid = (params.means[k, idx] + params.pooled_mean[idx]) / 2
        delta = (X[:, idx] - mid) * scale
        if M is not None:
            delta = delta @ M
        out[:, k] = delta @ w[k] + np.log(params.priors[k])
    return out


def quadratic_form_scores(params: ModelParams, X, selected=None) -> np.ndarray:
    """Standard form ``mu_k^T Sigma^{-1} x - mu_k^T Sigma^{-1} mu_k / 2 + log pi_k``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    idx = np.arange(params.n_features) if selected is None else np.asarray(selected)
    sd = np.sqrt(params.variances[idx])
    P = np.eye(len(idx)) if params.diagonal else params.corr.submatrix(idx)
    Sigma = P * np.outer(sd, sd)
    mu = params.means[:, idx]
    A = np.linalg.solve(Sigma, mu.T)  # Sigma^{-1} mu_k as columns
    return X[:, idx] @ A - 0.5 * np.sum(mu.T * A, axis=0) + np.log(params.priors)


class ShrinkageDiscriminantAnalysis(ClassifierMixin, BaseEstimator):
    """Shrinkage discriminant analysis with misclassification-rate feature selection.

    Parameters
    ----------
    diagonal : bool, default=False
        Ignore correlations (diagonal discriminant analysis).
    estimator : {"fdr-effect", "naive", "efron"}, default="fdr-effect"
        Effect size estimator feeding the misclassification-rate curve.
        ``"efron"`` requires two classes.
    selection : {"mr", "hc", "fndr", "all"}, default="mr"
        Thresholding rule for the number of top-ranked features.
    alpha : float, default=0.05
        Target nominal misclassification rate for ``selection="mr"``.
    fndr_cutoff : float, default=0.8
        Local fdr cutoff for ``selection="fndr"``.
    hc_fraction : float, default=0.1
        Fraction of smallest p-values searched by Higher Criticism.
    lambda_var, lambda_corr, lambda_freq : float or None
        Fixed shrinkage intensities; None estimates them from the data.
    theoretical_null : bool, default=False
        Fix the null scale at 1 instead of fitting an empirical null.
    truncation_quantile : float, default=0.75
        Quantile of ``|z|`` bounding the window used to fit the null.

    Attributes
    ----------
    classes_ : ndarray of shape (K,)
    params_ : ModelParams
    scores_ : ScoreSet
    effects_ : EffectEstimates
    selection_ : SelectionResult
    selected_ : ndarray
        Selected feature indices in rank order.
    coef_ : ndarray of shape (K, n_selected)
    intercept_ : ndarray of shape (K,)
    """

    def __init__(self, diagonal=False, estimator="fdr-effect", selection="mr", alpha=0.05,
                 fndr_cutoff=0.8, hc_fraction=0.1, lambda_var=None, lambda_corr=None,
                 lambda_freq=None, theoretical_null=False, truncation_quantile=0.75):
        self.diagonal = diagonal
        self.estimator = estimator
        self.selection = selection
        self.alpha = alpha
        self.fndr_cutoff = fndr_cutoff
        self.hc_fraction = hc_fraction
        self.lambda_var = lambda_var
        self.lambda_corr = lambda_corr
        self.lambda_freq = lambda_freq
        self.theoretical_null = theoretical_null
        self.truncation_quantile = truncation_quantile

    def fit(self, X, y):
        X, y = check_X_y(X, y, ensure_min_features=1)
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        if len(self.classes_) < 2:
            raise DataValidationError("need at least two classes")
        data = LabeledMatrix(X, y_idx + 1, label_names=[str(c) for c in self.classes_])
        self.n_features_in_ = X.shape[1]
        self.params_ = fit_model_params(data, self.diagonal, self.lambda_var,
                                        self.lambda_corr, self.lambda_freq)
        self.scores_ = compute_scores(self.params_)
        self.effects_ = estimate_effects(self.scores_, self.estimator,
                                         self.theoretical_null, self.truncation_quantile)
        return self.select(self.selection)

    def select(self, method):
        """Re-run feature selection with another rule on the already fitted scores."""
        check_is_fitted(self, "params_")
        self.selection_ = select_features(
            self.scores_, self.effects_, self.params_.priors, method, self.alpha,
            self.fndr_cutoff, self.hc_fraction, self.theoretical_null, self.truncation_quantile)
        self._set_rule(self.selection_.selected)
        return self

    def _set_rule(self, selected):
        self.selected_ = np.asarray(selected)
        p = self.params_
        idx = self.selected_
        sd = np.sqrt(p.variances[idx])
        coef = (p.means[:, idx] - p.pooled_mean[idx]) / sd
        if not p.diagonal:
            # P_S^{-1} applied as two half steps, never forming the dense inverse
            half = p.corr.apply_inv_sqrt(coef.T, idx)
            coef = p.corr.apply_inv_sqrt(half, idx).T
        self.coef_ = coef / sd
        mid = (p.means[:, self.selected_] + p.pooled_mean[self.selected_]) / 2
        self.intercept_ = -np.sum(self.coef_ * mid, axis=1) + np.log(p.priors)

    def decision_function(self, X):
        """Discriminant scores, shape ``(n_samples, K)``."""
        check_is_fitted(self, "coef_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise DataValidationError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return X[:, self.selected_] @ self.coef_.T + self.intercept_

    def predict(self, X):
        # argmax picks the lowest class index on exact ties
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]

    def predict_proba(self, X):
        return softmax(self.decision_function(X), axis=1)

    def transform(self, X):
        """Keep only the selected features."""
        check_is_fitted(self, "selected_")
        return check_array(X)[:, self.selected_]

    def get_support(self, indices=False):
        check_is_fitted(self, "selected_")
        if indices:
            return np.sort(self.selected_)
        mask = np.zeros(self.n_features_in_, dtype=bool)
        mask[self.selected_] = True
        return mask

    # persistence ---------------------------------------------------------

    def to_dict(self) -> dict:
        check_is_fitted(self, "coef_")
        return {
            "schema": "sdavs.classifier",
            "version": SCHEMA_VERSION,
            "config": self.get_params(),
            "n_features": int(self.n_features_in_),
            "classes": [c.item() if hasattr(c, "item") else c for c in self.classes_],
            "selected": [int(i) for i in self.selected_],
            "coef": self.coef_.tolist(),
            "intercept": self.intercept_.tolist(),
            "selection": self.selection_.to_dict() if hasattr(self, "selection_") else None,
            "params": self.params_.to_dict(self.selected_),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ShrinkageDiscriminantAnalysis":
        if doc.get("schema") != "sdavs.classifier":
            raise DataValidationError("not a classifier document")
        if doc.get("version") != SCHEMA_VERSION:
            raise DataValidationError(f"unsupported schema version {doc.get('version')}")
        clf = cls(**doc["config"])
        clf.classes_ = np.asarray(doc["classes"])
        clf.n_features_in_ = int(doc["n_features"])
        clf.selected_ = np.asarray(doc["selected"], dtype=int)
        clf.coef_ = np.asarray(doc["coef"], dtype=float).reshape(len(clf.classes_), -1)
        clf.intercept_ = np.asarray(doc["intercept"], dtype=float)
        clf.params_ = ModelParams.from_dict(doc["params"])
        return clf

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n")

    @classmethod
    def load(cls, path) -> "ShrinkageDiscriminantAnalysis":
        return cls.from_dict(json.loads(Path(path).read_text()))
