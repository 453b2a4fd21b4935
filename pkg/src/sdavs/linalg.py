"""Inverse square roots of correlation matrices."""

import numpy as np

from .exceptions import NumericalError

EIGEN_FLOOR = 1e-10


def corr_inv_sqrt(corr, floor: float = EIGEN_FLOOR):
    """Symmetric inverse square root ``P^{-1/2}`` of a correlation matrix.

    ``None`` stands for the identity (diagonal model) and is passed through.
    Eigenvalues below ``floor`` are raised to it; clearly negative
    eigenvalues mean the input is not a valid correlation matrix.
    """
    if corr is None:
        return None
    corr = np.asarray(corr, dtype=float)
    if corr.ndim != 2 or corr.shape[0] != corr.shape[1]:
        raise NumericalError(f"correlation must be square, got shape {corr.shape}")
    evals, evecs = np.linalg.eigh((corr + corr.T) / 2)
    scale = max(1.0, float(np.abs(evals).max(initial=0.0)))
    if evals.size and evals.min() < -1e-8 * scale:
        raise NumericalError(
            f"correlation matrix is not positive semi-definite (eigenvalue {evals.min():.3g})"
        )
    evals = np.maximum(evals, floor)
    return (evecs / np.sqrt(evals)) @ evecs.T


class ShrunkCorrelation:
    """Ridge-shrunk correlation ``(1 - lam) * R + lam * I``.

    The raw correlation ``R`` is held either densely or as a factor ``F``
    with ``R = F.T @ F`` off the diagonal (the standardized pooled residuals
    scaled by ``1/sqrt(n - K)``).  A zero column in ``F`` marks a constant
    feature whose correlations are taken to be zero.  The factored form makes
    ``P^{-1/2}`` cheap when ``d`` far exceeds the number of samples, since
    ``R`` then has rank at most ``n - K``.
    """

    def __init__(self, lam: float, factor=None, dense=None):
        if (factor is None) == (dense is None):
            raise ValueError("give exactly one of factor or dense")
        self.lam = float(lam)
        self.factor = None if factor is None else np.asarray(factor, dtype=float)
        self._dense = None if dense is None else np.asarray(dense, dtype=float)

    @classmethod
    def from_dense(cls, matrix) -> "ShrunkCorrelation":
        """Wrap an already-shrunk correlation matrix."""
        return cls(lam=0.0, dense=matrix)

    @property
    def d(self) -> int:
        return self.factor.shape[1] if self.factor is not None else self._dense.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        if self._dense is None:
            self._dense = self.submatrix(None)
        return self._dense

    def submatrix(self, idx=None) -> np.ndarray:
        if self.factor is None:
            P = self._dense if idx is None else self._dense[np.ix_(idx, idx)]
            return P.copy()
        F = self.factor if idx is None else self.factor[:, idx]
        P = (1.0 - self.lam) * (F.T @ F)
        np.fill_diagonal(P, 1.0)
        return P

    def inv_sqrt(self, idx=None) -> np.ndarray:
        """Dense ``P_S^{-1/2}`` for the feature subset ``idx`` (all if None)."""
        size = self.d if idx is None else len(idx)
        return self.apply_inv_sqrt(np.eye(size), idx)

    def apply_inv_sqrt(self, B, idx=None) -> np.ndarray:
        """Compute ``P_S^{-1/2} @ B`` where ``B`` has ``|S|`` rows."""
        B = np.asarray(B, dtype=float)
        if self.factor is None or not self._use_low_rank(idx):
            return corr_inv_sqrt(self.submatrix(idx)) @ B
        F = self.factor if idx is None else self.factor[:, idx]
        out = B.copy()  # constant features keep identity rows
        live = np.flatnonzero(np.any(F != 0, axis=0))
        if live.size == 0:
            return out
        if self.lam <= 0:
            raise NumericalError("rank-deficient correlation with zero shrinkage intensity")
        _, s, Wt = np.linalg.svd(F[:, live], full_matrices=False)
        evals = np.maximum(self.lam + (1.0 - self.lam) * s**2, EIGEN_FLOOR)
        Bl = B[live]
        proj = Wt @ Bl
        out[live] = (Wt.T * (evals ** -0.5 - self.lam ** -0.5)) @ proj + Bl / np.sqrt(self.lam)
        return out

    def _use_low_rank(self, idx) -> bool:
        m = self.factor.shape[0]
        size = self.d if idx is None else len(idx)
        return size > 200 and size > 2 * m
