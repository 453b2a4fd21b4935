"""Decorrelated feature weights, effect sizes, cat scores and feature ranking."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .linalg import corr_inv_sqrt  # noqa: F401  (re-exported)
from .shrinkage import ModelParams


@dataclass
class ScoreSet:
    """Per-feature scores derived from fitted model parameters.

    Class indices in the pairwise maps are 0-based, with keys ``(k, l)`` for
    ``k < l``.
    """

    w_pool: np.ndarray
    w_pair: dict
    cat_pool: np.ndarray
    cat_pair: dict
    S: np.ndarray
    ranking: np.ndarray
    counts: np.ndarray


def feature_weights(params: ModelParams) -> np.ndarray:
    """``P^{-1/2} V^{-1/2} (mu_k - mu_pool)`` for every class, shape ``(K, d)``."""
    centered = (params.means - params.pooled_mean) / np.sqrt(params.variances)
    if params.diagonal:
        return centered
    return params.corr.apply_inv_sqrt(centered.T).T


def pairwise_effects(w_pool) -> dict:
    w_pool = np.asarray(w_pool)
    return {(k, l): w_pool[k] - w_pool[l] for k, l in combinations(range(len(w_pool)), 2)}


def pair_effect(w_pair: dict, k: int, l: int) -> np.ndarray:
    """Effect vector for an ordered pair, using the sign flip for ``k > l``."""
    if k == l:
        return np.zeros_like(next(iter(w_pair.values())))
    return w_pair[(k, l)] if k < l else -w_pair[(l, k)]


def cat_scale_pair(w_pair: dict, counts) -> dict:
    """Multiply each pairwise effect by ``(1/n_k + 1/n_l)^{-1/2}``."""
    counts = np.asarray(counts, dtype=float)
    return {(k, l): w / np.sqrt(1 / counts[k] + 1 / counts[l]) for (k, l), w in w_pair.items()}


def cat_scale_pool(w_pool, counts) -> np.ndarray:
    """Multiply row ``k`` of the class-vs-pool weights by ``(1/n_k - 1/n)^{-1/2}``."""
    counts = np.asarray(counts, dtype=float)
    gap = 1 / counts - 1 / counts.sum()
    if np.any(gap <= 0):
        raise ValueError("class-vs-pool scaling needs at least two non-empty classes")
    return np.asarray(w_pool) / np.sqrt(gap)[:, None]


def summary_statistic(cat_pool) -> np.ndarray:
    return (np.asarray(cat_pool) ** 2).sum(axis=0)


def rank_features(S) -> np.ndarray:
    """Feature indices by decreasing ``S``; ties keep ascending index order."""
    S = np.asarray(S)
    return np.lexsort((np.arange(S.size), -S))


def compute_scores(params: ModelParams) -> ScoreSet:
    w_pool = feature_weights(params)
    w_pair = pairwise_effects(w_pool)
    cat_pool = cat_scale_pool(w_pool, params.counts)
    S = summary_statistic(cat_pool)
    return ScoreSet(
        w_pool=w_pool,
        w_pair=w_pair,
        cat_pool=cat_pool,
        cat_pair=cat_scale_pair(w_pair, params.counts),
        S=S,
        ranking=rank_features(S),
        counts=np.asarray(params.counts),
    )
