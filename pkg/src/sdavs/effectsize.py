"""Selection-bias-corrected effect size estimates."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .fdr import FdrModel, PoissonFdr, local_fdr
from .scores import ScoreSet, pairwise_effects

METHODS = ("naive", "fdr_effect", "efron")
MIN_SHRINKAGE = 0.5
LOG_FDR_FLOOR = 1e-12


@dataclass
class EffectEstimates:
    method: str
    w_pool: np.ndarray
    w_pair: dict
    fdr_models: list = field(default_factory=list)
    flagged: np.ndarray | None = None


def naive_effect(scores: ScoreSet) -> EffectEstimates:
    """Plug-in estimates, passed through unchanged."""
    return EffectEstimates("naive", scores.w_pool.copy(),
                           {k: v.copy() for k, v in scores.w_pair.items()})


def fdr_effect_shrink(w, w_cat, fdr_model) -> np.ndarray:
    """``w * min(0.5, 1 - fdr(w_cat))``.

    ``fdr_model`` is any callable mapping statistics to local fdr values.
    """
    w = np.asarray(w, dtype=float)
    w_cat = np.asarray(w_cat, dtype=float)
    if w.shape != w_cat.shape:
        raise ValueError("weights and cat scores must have the same shape")
    factor = np.minimum(MIN_SHRINKAGE, 1.0 - np.asarray(fdr_model(w_cat), dtype=float))
    return w * factor


def multiclass_shrunken_effects(scores: ScoreSet, fdr_models=None,
                                theoretical_null: bool = False,
                                truncation_quantile: float = 0.75) -> EffectEstimates:
    """Shrink each class-vs-pool weight vector with its own fdr model.

    Pairwise effects are then differences of the shrunken class-vs-pool
    weights, so the identity ``w_pair[k, l] = w_pool[k] - w_pool[l]`` carries
    over to the shrunken values.
    """
    K = scores.w_pool.shape[0]
    if fdr_models is None:
        fdr_models = [local_fdr(scores.cat_pool[k], theoretical_null, truncation_quantile)
                      for k in range(K)]
    elif isinstance(fdr_models, FdrModel) or callable(fdr_models):
        fdr_models = [fdr_models] * K
    shrunk = np.vstack([fdr_effect_shrink(scores.w_pool[k], scores.cat_pool[k], fdr_models[k])
                        for k in range(K)])
    return EffectEstimates("fdr_effect", shrunk, pairwise_effects(shrunk), list(fdr_models))


def cat_to_z(w_cat, df: int) -> np.ndarray:
    """Map t-type statistics to z-scores through the t and normal CDFs."""
    w_cat = np.asarray(w_cat, dtype=float)
    return np.sign(w_cat) * stats.norm.isf(stats.t.sf(np.abs(w_cat), df))


def efron_effect(w_cat, counts, fdr=None):
    """Tweedie-type effect estimate ``-(1/n_k + 1/n_l)^{1/2} d/dz log fdr(z)``.

    ``counts`` is ``(n_k, n_l)``.  The derivative is a central difference
    with step ``1e-3`` times the range of the z-scores.  When ``fdr`` is
    omitted a smooth theoretical-null model is fitted to the z-scores.  An fdr
    value of zero is clamped to ``1e-12`` and the feature is flagged.

    Returns
    -------
    effect : ndarray
    flagged : ndarray of bool
    """
    n_k, n_l = counts
    z = cat_to_z(w_cat, n_k + n_l - 2)
    if fdr is None:
        fdr = PoissonFdr(z)
    h = 1e-3 * float(np.ptp(z)) if z.size > 1 and np.ptp(z) > 0 else 1e-3

    if hasattr(fdr, "log_fdr"):
        lo, hi = fdr.log_fdr(z - h), fdr.log_fdr(z + h)
        flagged = ~np.isfinite(lo) | ~np.isfinite(hi)
        floor = np.log(LOG_FDR_FLOOR)
        lo, hi = np.nan_to_num(lo, nan=floor, neginf=floor), np.nan_to_num(hi, nan=floor, neginf=floor)
    else:
        f_lo, f_hi = np.asarray(fdr(z - h), float), np.asarray(fdr(z + h), float)
        flagged = (f_lo < LOG_FDR_FLOOR) | (f_hi < LOG_FDR_FLOOR)
        lo = np.log(np.maximum(f_lo, LOG_FDR_FLOOR))
        hi = np.log(np.maximum(f_hi, LOG_FDR_FLOOR))
    slope = (hi - lo) / (2 * h)
    return -np.sqrt(1 / n_k + 1 / n_l) * slope, flagged


def efron_effects(scores: ScoreSet) -> EffectEstimates:
    """Two-class Efron estimates, decomposed back into class-vs-pool weights."""
    if scores.w_pool.shape[0] != 2:
        raise ValueError("the Efron estimator is defined for two classes only")
    n1, n2 = scores.counts
    effect, flagged = efron_effect(scores.cat_pair[(0, 1)], (n1, n2))
    n = n1 + n2
    w_pool = np.vstack([effect * n2 / n, -effect * n1 / n])
    return EffectEstimates("efron", w_pool, {(0, 1): effect}, flagged=flagged)


def estimate_effects(scores: ScoreSet, method: str = "fdr_effect",
                     theoretical_null: bool = False,
                     truncation_quantile: float = 0.75) -> EffectEstimates:
    method = method.replace("-", "_")
    if method == "naive":
        return naive_effect(scores)
    if method == "fdr_effect":
        return multiclass_shrunken_effects(scores, None, theoretical_null, truncation_quantile)
    if method == "efron":
        return efron_effects(scores)
    raise ValueError(f"unknown effect estimator {method!r}; choose from {METHODS}")
