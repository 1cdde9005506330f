"""Precision-matrix estimation through nodewise lasso regressions.

Column j is regressed on the others by minimizing

    n^{-1} sum_t (gamma^T Y_t)^2 + 2 lambda_j |gamma|_1   subject to gamma_j = -1

with cyclic coordinate descent and soft thresholding.  Residuals
``eps_{j,t} = -beta_j^T Y_t`` feed the de-biased products

    v_{j,j} = n^{-1} sum_t eps_{j,t}^2
    v_{i,j} = -n^{-1} sum_t ( eps_i eps_j + beta_{i,j} eps_j^2 + beta_{j,i} eps_i^2 ),  i != j

and the precision estimate is omega_{i,j} = v_{i,j} / (v_{i,i} v_{j,j}).
The series is assumed mean-zero; products are not re-centered.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateDataError
from .series import validate_series

try:
    from sklearn.base import BaseEstimator
except ImportError:  # pragma: no cover
    BaseEstimator = object

__all__ = [
    "NodewiseFit",
    "PrecisionEstimate",
    "default_penalties",
    "lasso_nodewise",
    "precision_estimate",
    "NodewisePrecision",
]

_DEFAULT_TOL = 1e-8
_DEFAULT_MAX_SWEEPS = 10_000
_RESIDUAL_REL_TOL = 1e-12


@dataclass(frozen=True)
class NodewiseFit:
    """One nodewise regression: coefficient vector with beta[j] = -1."""

    beta: np.ndarray
    j: int
    penalty: float
    converged: bool
    sweeps: int


@dataclass(frozen=True)
class PrecisionEstimate:
    """Assembled precision estimate with its building blocks."""

    omega: np.ndarray  # (d, d), symmetric
    residual_products: np.ndarray  # v-hat, symmetric
    coefficients: np.ndarray  # row j = beta_j (diagonal fixed at -1)
    penalties: np.ndarray
    converged: np.ndarray  # (d,) bool per nodewise fit
    sweeps: np.ndarray  # (d,) int


def default_penalties(series) -> np.ndarray:
    """Per-column default: 2 sqrt(log d / n) times the column standard deviation."""
    y = validate_series(series)
    n, d = y.shape
    return 2.0 * math.sqrt(math.log(d) / n) * y.std(axis=0)


def _cd_lasso(gram: np.ndarray, j: int, lam: float, tol: float,
              max_sweeps: int) -> tuple[np.ndarray, bool, int]:
    d = gram.shape[0]
    gamma = np.zeros(d)
    gamma[j] = -1.0
    free = [k for k in range(d) if k != j]
    for sweep in range(1, max_sweeps + 1):
        biggest = 0.0
        for k in free:
            r = gram[k] @ gamma - gram[k, k] * gamma[k]
            z = -r
            new = math.copysign(max(abs(z) - lam, 0.0), z) / gram[k, k]
            delta = abs(new - gamma[k])
            if delta > biggest:
                biggest = delta
            gamma[k] = new
        if biggest < tol:
            return gamma, True, sweep
    return gamma, False, max_sweeps


def lasso_nodewise(series, j: int, penalty: float, tol: float = _DEFAULT_TOL,
                   max_sweeps: int = _DEFAULT_MAX_SWEEPS) -> NodewiseFit:
    """Fit the nodewise lasso for column ``j``.

    Non-convergence within ``max_sweeps`` sets ``converged=False`` (and warns)
    rather than raising.
    """
    y = validate_series(series)
    n, d = y.shape
    if not (0 <= j < d):
        raise ValueError(f"column index j must be in [0, {d}), got {j}")
    if penalty < 0:
        raise ValueError(f"penalty must be nonnegative, got {penalty}")
    gram = (y.T @ y) / n
    if np.min(np.diag(gram)) <= 0.0:
        k = int(np.argmin(np.diag(gram)))
        raise DegenerateDataError(f"column {k} has zero second moment")
    beta, converged, sweeps = _cd_lasso(gram, j, float(penalty), tol, max_sweeps)
    if not converged:
        warnings.warn(
            f"nodewise lasso for column {j} did not converge in {max_sweeps} sweeps",
            UserWarning,
            stacklevel=2,
        )
    return NodewiseFit(beta=beta, j=j, penalty=float(penalty),
                       converged=converged, sweeps=sweeps)


def _resolve_penalties(y: np.ndarray, penalties) -> np.ndarray:
    d = y.shape[1]
    if penalties is None:
        return default_penalties(y)
    lam = np.asarray(penalties, dtype=np.float64)
    if lam.ndim == 0:
        lam = np.full(d, float(lam))
    if lam.shape != (d,):
        raise ValueError(f"need one penalty per column ({d}), got shape {lam.shape}")
    if not np.all(lam >= 0):
        raise ValueError("penalties must be nonnegative")
    return lam


def precision_estimate(series, penalties=None, tol: float = _DEFAULT_TOL,
                       max_sweeps: int = _DEFAULT_MAX_SWEEPS) -> PrecisionEstimate:
    """Estimate the precision matrix of a (mean-zero) series.

    ``penalties`` may be a scalar, a length-d vector, or None for the default
    rule.  Vanishing residual variance (collinear columns) raises
    :class:`DegenerateDataError`; v-hat is symmetric by construction.
    """
    y = validate_series(series)
    n, d = y.shape
    lam = _resolve_penalties(y, penalties)
    fits = [lasso_nodewise(y, j, lam[j], tol=tol, max_sweeps=max_sweeps) for j in range(d)]
    betas = np.vstack([f.beta for f in fits])
    resid = -(y @ betas.T)  # column j: eps_{j,t}
    m = (resid.T @ resid) / n
    dm = np.diag(m).copy()
    gram_diag = np.einsum("ti,ti->i", y, y) / n
    bad = dm <= _RESIDUAL_REL_TOL * np.maximum(gram_diag, 1.0)
    if bad.any():
        j = int(np.argmax(bad))
        raise DegenerateDataError(
            f"residual variance of column {j} vanishes ({dm[j]:.3g}); "
            "columns are (near-)collinear"
        )
    v = -(m + betas * dm[None, :] + betas.T * dm[:, None])
    v = np.triu(v, 1)
    v = v + v.T
    np.fill_diagonal(v, dm)
    omega = v / np.outer(dm, dm)
    return PrecisionEstimate(
        omega=omega,
        residual_products=v,
        coefficients=betas,
        penalties=lam,
        converged=np.asarray([f.converged for f in fits]),
        sweeps=np.asarray([f.sweeps for f in fits]),
    )


class NodewisePrecision(BaseEstimator):
    """Estimator facade over :func:`precision_estimate`.

    Attributes after ``fit``: ``precision_``, ``residual_products_``,
    ``coefficients_``, ``penalties_``, ``converged_``.
    """

    def __init__(self, penalties=None, tol=_DEFAULT_TOL, max_sweeps=_DEFAULT_MAX_SWEEPS):
        self.penalties = penalties
        self.tol = tol
        self.max_sweeps = max_sweeps

    def fit(self, X, y=None):
        est = precision_estimate(X, penalties=self.penalties, tol=self.tol,
                                 max_sweeps=self.max_sweeps)
        self.precision_ = est.omega
        self.residual_products_ = est.residual_products
        self.coefficients_ = est.coefficients
        self.penalties_ = est.penalties
        self.converged_ = est.converged
        self.n_samples_, self.n_features_ = validate_series(X).shape
        return self
