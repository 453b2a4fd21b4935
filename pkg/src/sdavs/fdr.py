"""Two-group mixture fitting and local false discovery rates.

The null component is a centered normal whose scale is fitted by truncated
maximum likelihood on the central statistics (an empirical null).  The
mixture density is estimated nonparametrically with the Grenander estimator
(the slopes of the least concave majorant of the ECDF), applied to the
two-sided null p-values.  On the p-value scale the null density is uniform,
so the local fdr reduces to ``eta0 / f(p)``, which is automatically
non-increasing in ``|z|``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize, stats
from sklearn.isotonic import isotonic_regression

from .exceptions import DataValidationError, NumericalError

PVALUE_FLOOR = 1e-300


@dataclass(frozen=True)
class GrenanderDensity:
    """Non-increasing step density on ``[x_min, knots[-1]]``.

    ``slopes[j]`` is the density on ``(knots[j-1], knots[j]]`` with
    ``knots[-1]`` read as ``x_min``.
    """

    knots: np.ndarray
    slopes: np.ndarray
    x_min: float = 0.0

    @property
    def edges(self) -> np.ndarray:
        return np.concatenate([[self.x_min], self.knots])

    def pdf(self, x, extend: bool = False) -> np.ndarray:
        """Density at ``x``; with ``extend`` the last step continues past the support."""
        x = np.asarray(x, dtype=float)
        j = np.searchsorted(self.knots, x, side="left")
        out = self.slopes[np.minimum(j, len(self.slopes) - 1)]
        if not extend:
            out = np.where((x < self.x_min) | (x > self.knots[-1]), 0.0, out)
        return out

    def cdf(self, x) -> np.ndarray:
        x = np.clip(np.asarray(x, dtype=float), self.x_min, self.knots[-1])
        edges = self.edges
        mass = np.concatenate([[0.0], np.cumsum(self.slopes * np.diff(edges))])
        j = np.clip(np.searchsorted(self.knots, x, side="left"), 0, len(self.slopes) - 1)
        return mass[j] + self.slopes[j] * (x - edges[j])

    def integral(self) -> float:
        return float((self.slopes * np.diff(self.edges)).sum())

    def to_dict(self) -> dict:
        return {"x_min": self.x_min, "knots": self.knots.tolist(), "slopes": self.slopes.tolist()}


def grenander_density(values, x_min: float = 0.0) -> GrenanderDensity:
    """Grenander estimate of a non-increasing density on ``[x_min, max(values)]``.

    The ECDF increments between consecutive distinct values are turned into
    raw slopes, which weighted antitonic regression (pool adjacent violators)
    pools into the slopes of the least concave majorant.  Observations sitting
    exactly at ``x_min`` have no width to spread over and are pooled into the
    first positive-width segment.
    """
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0 or not np.all(np.isfinite(x)):
        raise DataValidationError("Grenander estimator needs finite values")
    if np.any(x < x_min):
        raise DataValidationError("values lie below the lower support bound")
    u, counts = np.unique(x, return_counts=True)
    if u[0] == x_min:
        if u.size == 1:
            raise DataValidationError("all values sit at the lower support bound")
        counts[1] += counts[0]
        u, counts = u[1:], counts[1:]
    widths = np.diff(np.concatenate([[x_min], u]))
    raw = counts / x.size / widths
    slopes = isotonic_regression(raw, sample_weight=widths, increasing=False)
    keep = np.ones(u.size, dtype=bool)
    keep[:-1] = slopes[:-1] != slopes[1:]
    return GrenanderDensity(knots=u[keep], slopes=slopes[keep], x_min=float(x_min))


def fit_null_truncated_ml(stats_, truncation_quantile: float = 0.75,
                          theoretical_null: bool = False):
    """Fit a ``N(0, sigma0^2)`` null on the statistics with ``|z| <= q``.

    ``q`` is the ``truncation_quantile`` quantile of ``|z|``.  The scale
    maximizes the truncated-normal likelihood on ``[-q, q]`` (or is fixed at 1
    for the theoretical null) and the null proportion is the observed share
    inside the window divided by its null probability.

    Returns
    -------
    sigma0, eta0, q : float
    """
    a = np.abs(np.asarray(stats_, dtype=float).ravel())
    if not np.all(np.isfinite(a)):
        raise DataValidationError("statistics must be finite")
    q = float(np.quantile(a, truncation_quantile))
    inside = a[a <= q]
    m = inside.size
    if m < 10:
        raise NumericalError(f"only {m} statistics inside the truncation window; need 10")
    if q <= 0 or np.ptp(inside) == 0:
        raise NumericalError("degenerate truncation window: central statistics are all equal")

    if theoretical_null:
        sigma0 = 1.0
    else:
        ss = float((inside**2).sum())

        def nll(log_sigma):
            s = np.exp(log_sigma)
            mass = 2 * stats.norm.cdf(q / s) - 1
            return m * log_sigma + ss / (2 * s * s) + m * np.log(max(mass, 1e-300))

        lo, hi = np.log(q) - 8, np.log(q) + 6
        res = optimize.minimize_scalar(nll, bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-10})
        sigma0 = float(np.exp(res.x))
    mass = 2 * stats.norm.cdf(q / sigma0) - 1
    eta0 = float(min(1.0, (m / a.size) / mass))
    return sigma0, eta0, q


@dataclass(frozen=True)
class FdrModel:
    """Fitted two-group model; calling it returns local fdr values."""

    sigma0: float
    eta0: float
    truncation_point: float
    grenander: GrenanderDensity
    theoretical_null: bool = False

    def pvalues(self, z) -> np.ndarray:
        p = 2 * stats.norm.sf(np.abs(np.asarray(z, dtype=float)) / self.sigma0)
        return np.clip(p, PVALUE_FLOOR, 1.0)

    def __call__(self, z) -> np.ndarray:
        f = self.grenander.pdf(self.pvalues(z), extend=True)
        with np.errstate(divide="ignore"):
            fdr = np.where(f > 0, self.eta0 / f, 1.0)
        return np.clip(fdr, 0.0, 1.0)

    fdr_at = __call__

    def to_dict(self) -> dict:
        return {
            "sigma0": self.sigma0,
            "eta0": self.eta0,
            "truncation_point": self.truncation_point,
            "theoretical_null": self.theoretical_null,
            "grenander": self.grenander.to_dict(),
        }


def local_fdr(stats_, theoretical_null: bool = False,
              truncation_quantile: float = 0.75) -> FdrModel:
    """Fit the null and the Grenander mixture density to a vector of statistics."""
    sigma0, eta0, q = fit_null_truncated_ml(stats_, truncation_quantile, theoretical_null)
    p = 2 * stats.norm.sf(np.abs(np.asarray(stats_, dtype=float)) / sigma0)
    dens = grenander_density(np.clip(p, PVALUE_FLOOR, 1.0))
    return FdrModel(sigma0, eta0, q, dens, theoretical_null)


class PoissonFdr:
    """Smooth local fdr with the theoretical ``N(0, 1)`` null.

    The mixture density of the z-scores is fitted by Poisson regression of
    histogram counts on a Legendre polynomial basis (Lindsey's method), which
    gives a differentiable ``log f``.  ``log_fdr`` is not capped at zero so
    that its derivative stays informative in the center.
    """

    def __init__(self, z, bins: int = 120, degree: int = 7, eta0: float | None = None):
        import statsmodels.api as sm

        z = np.asarray(z, dtype=float).ravel()
        self.lo, self.hi = float(z.min()), float(z.max())
        if self.hi <= self.lo:
            raise NumericalError("z-scores have no spread")
        self.degree = degree
        counts, edges = np.histogram(z, bins=bins, range=(self.lo, self.hi))
        centers = (edges[:-1] + edges[1:]) / 2
        fit = sm.GLM(counts, self._basis(centers), family=sm.families.Poisson()).fit()
        self.coef = np.asarray(fit.params)
        self.log_norm = float(np.log(z.size * (edges[1] - edges[0])))
        self.eta0 = fit_null_truncated_ml(z, theoretical_null=True)[1] if eta0 is None else eta0

    def _basis(self, z):
        t = 2 * (np.asarray(z, dtype=float) - self.lo) / (self.hi - self.lo) - 1
        return np.polynomial.legendre.legvander(t, self.degree)

    def log_density(self, z) -> np.ndarray:
        return self._basis(z) @ self.coef - self.log_norm

    def log_fdr(self, z) -> np.ndarray:
        return np.log(self.eta0) + stats.norm.logpdf(z) - self.log_density(z)

    def __call__(self, z) -> np.ndarray:
        return np.minimum(1.0, np.exp(self.log_fdr(z)))
