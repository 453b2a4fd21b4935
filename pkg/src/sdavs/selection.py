"""Misclassification rate of the LDA rule and feature-count thresholding."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .effectsize import EffectEstimates
from .fdr import local_fdr
from .scores import ScoreSet, pair_effect

SELECTION_METHODS = ("mr", "hc", "fndr", "all")


@dataclass
class SelectionResult:
    method: str
    ranking: np.ndarray
    t_star: int
    selected: np.ndarray
    alpha: float | None = None
    mr_curve: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self, feature_names=None) -> dict:
        doc = {
            "method": self.method.upper(),
            "t_star": int(self.t_star),
            "n_selected": int(len(self.selected)),
            "selected": [int(i) for i in self.selected],
            "ranking": [int(i) for i in self.ranking],
            "alpha": self.alpha,
            "mr_curve": None if self.mr_curve is None else self.mr_curve.tolist(),
            "diagnostics": self.diagnostics,
        }
        if feature_names is not None:
            doc["selected_names"] = [feature_names[i] for i in self.selected]
        return doc


def _check_priors(priors) -> np.ndarray:
    priors = np.asarray(priors, dtype=float)
    if np.any(priors <= 0) or abs(priors.sum() - 1.0) > 1e-8:
        raise ValueError(f"priors must be positive and sum to 1, got {priors}")
    return priors


def _rate_from_sq_norms(sq_norms: np.ndarray, priors: np.ndarray) -> np.ndarray:
    """Error probability from squared pairwise effect norms of shape (K, K, T)."""
    K = len(priors)
    log_ratio = np.log(priors[:, None] / priors[None, :])
    total = np.zeros(sq_norms.shape[-1])
    for k in range(K):
        worst = np.full(sq_norms.shape[-1], np.inf)
        for l in range(K):
            if l == k:
                continue
            n2, lr = sq_norms[k, l], log_ratio[k, l]
            norm = np.sqrt(n2)
            with np.errstate(divide="ignore", invalid="ignore"):
                arg = (n2 + 2 * lr) / (2 * norm)
            arg = np.where(norm > 0, arg, np.sign(lr) * np.inf if lr != 0 else 0.0)
            worst = np.minimum(worst, arg)
        total += priors[k] * stats.norm.cdf(-worst)
    return total


def misclassification_rate(w_pair: dict, priors) -> float:
    """Total error probability of the population LDA rule.

    ``w_pair`` maps ``(k, l)`` with ``k < l`` to the effect vector between
    classes ``k`` and ``l``; the reverse pairs follow by sign flip.  A zero
    effect vector is handled by the limit of the per-pair term, so with
    unequal priors the rule always picks the more probable class.
    """
    priors = _check_priors(priors)
    K = len(priors)
    sq = np.zeros((K, K, 1))
    for k in range(K):
        for l in range(K):
            if k != l:
                sq[k, l, 0] = float(np.sum(pair_effect(w_pair, k, l) ** 2))
    return float(_rate_from_sq_norms(sq, priors)[0])


def mr_curve(ranking, w_pair: dict, priors) -> np.ndarray:
    """Misclassification rate using only the ``t`` top-ranked features, ``t = 1..d``."""
    priors = _check_priors(priors)
    ranking = np.asarray(ranking)
    K = len(priors)
    sq = np.zeros((K, K, ranking.size))
    for (k, l), w in w_pair.items():
        sq[k, l] = sq[l, k] = np.cumsum(np.asarray(w)[ranking] ** 2)
    return np.clip(_rate_from_sq_norms(sq, priors), 0.0, 1.0)


def select_mr(curve, alpha: float = 0.05) -> int:
    """Smallest ``t`` whose nominal error is at most ``alpha``; ``d`` if none is."""
    curve = np.asarray(curve)
    hits = np.flatnonzero(curve <= alpha)
    return int(hits[0]) + 1 if hits.size else int(curve.size)


def select_hc(pvalues, fraction: float = 0.10):
    """Higher Criticism threshold over the smallest ``fraction`` of p-values.

    Returns
    -------
    t_star : int
    diagnostics : dict
        Maximal HC value, the search bound, and ``no_signal`` when the
        maximum sits on that bound.
    """
    p = np.sort(np.asarray(pvalues, dtype=float), kind="stable")
    d = p.size
    if d < 10:
        raise ValueError("Higher Criticism needs at least 10 p-values")
    imax = max(1, int(np.floor(fraction * d)))
    i = np.arange(1, imax + 1)
    pi = p[:imax]
    with np.errstate(divide="ignore", invalid="ignore"):
        hc = np.sqrt(d) * (i / d - pi) / np.sqrt(pi * (1 - pi))
    hc = np.where(np.isnan(hc), -np.inf, hc)
    t_star = int(np.argmax(hc)) + 1
    return t_star, {
        "hc_max": float(hc[t_star - 1]),
        "hc_fraction": fraction,
        "search_bound": imax,
        "no_signal": bool(t_star == imax),
    }


def select_fndr(fdr_values, cutoff: float = 0.8) -> np.ndarray:
    """Indices of features with local fdr at most ``cutoff``."""
    return np.flatnonzero(np.asarray(fdr_values) <= cutoff)


def selection_statistic(scores: ScoreSet):
    """Per-feature z-type statistic and two-sided p-value for HC and FNDR.

    Two classes use the pairwise cat score, t-distributed with ``n - 2``
    degrees of freedom.  More classes use ``S / K`` referred to an
    ``F(K - 1, n - K)`` distribution (exact for balanced classes without
    correlation), converted to a normal score.
    """
    counts = scores.counts
    n, K = int(counts.sum()), len(counts)
    if K == 2:
        z = scores.cat_pair[(0, 1)]
        p = 2 * stats.t.sf(np.abs(z), n - 2)
    else:
        p = stats.f.sf(scores.S / K, K - 1, n - K)
        z = stats.norm.isf(np.clip(p, 1e-300, 1.0) / 2)
    return z, p


def top_features(S, ranking, t_star: int) -> np.ndarray:
    """All features with ``S_i >= S`` of the ``t_star``-th ranked feature, in rank order."""
    S = np.asarray(S)
    ranking = np.asarray(ranking)
    if t_star < 1:
        return ranking[:0]
    cut = S[ranking[t_star - 1]]
    return ranking[S[ranking] >= cut]


def select_features(scores: ScoreSet, effects: EffectEstimates, priors,
                    method: str = "mr", alpha: float = 0.05,
                    fndr_cutoff: float = 0.8, hc_fraction: float = 0.10,
                    theoretical_null: bool = False,
                    truncation_quantile: float = 0.75) -> SelectionResult:
    """Choose the number of top-ranked features with one of the thresholding rules."""
    method = method.lower()
    ranking, S = scores.ranking, scores.S
    d = ranking.size
    curve, diag = None, {}
    if method == "mr":
        curve = mr_curve(ranking, effects.w_pair, priors)
        t_star = select_mr(curve, alpha)
        if curve[t_star - 1] > alpha:
            warnings.warn(f"target error {alpha} not reached; all {d} features are used",
                          RuntimeWarning, stacklevel=2)
            diag["fallback"] = "all"
        diag["nominal_error"] = float(curve[t_star - 1])
        diag["effect_estimator"] = effects.method
    elif method == "hc":
        _, p = selection_statistic(scores)
        t_star, diag = select_hc(p, hc_fraction)
    elif method == "fndr":
        z, _ = selection_statistic(scores)
        model = local_fdr(z, theoretical_null, truncation_quantile)
        chosen = select_fndr(model(z), fndr_cutoff)
        diag = {"fndr_cutoff": fndr_cutoff, "sigma0": model.sigma0, "eta0": model.eta0}
        if chosen.size == 0:
            warnings.warn("no feature passes the fdr cutoff; keeping the top-ranked feature",
                          RuntimeWarning, stacklevel=2)
            diag["fallback"] = "top1"
            t_star = 1
        else:
            # fdr is monotone in the statistic, so the chosen set is a top-t set
            position = np.empty(d, dtype=int)
            position[ranking] = np.arange(d)
            t_star = int(position[chosen].max()) + 1
    elif method == "all":
        t_star = d
    else:
        raise ValueError(f"unknown selection method {method!r}; choose from {SELECTION_METHODS}")
    return SelectionResult(
        method=method,
        ranking=ranking,
        t_star=t_star,
        selected=top_features(S, ranking, t_star),
        alpha=alpha if method == "mr" else None,
        mr_curve=curve,
        diagnostics=diag,
    )
