"""Kernel estimation of the long-run covariance of a dependent series.

The estimand is Xi = Cov(n^{-1/2} sum_t X_t).  The estimator weights sample
autocovariances with a kernel evaluated at lag/bandwidth:

    Xi_hat = sum_{|j| < n} K(j / b_n) H_hat_j,
    H_hat_j = n^{-1} sum_t (X_t - mean)(X_{t-j} - mean)^T,   H_hat_{-j} = H_hat_j^T

with the bandwidth picked by an AR(1) plug-in rule fitted per coordinate:

    a_hat = sum_j 4 rho_j^2 sigma_j^4 (1-rho_j)^{-8} / sum_j sigma_j^4 (1-rho_j)^{-4}
    b_n   = max(1.3221 (a_hat n)^{1/5}, 1.3221)

The aggregation over lags runs through FFT cross-spectra (all lags at once);
``tests/test_lrcov.py`` pins it against the literal per-lag double loop.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft
import scipy.linalg

from .exceptions import DegenerateDataError, NumericalError
from .kernels import KernelSpec, qs_kernel
from .series import validate_series

try:  # estimator facade only; the functional API has no sklearn dependency
    from sklearn.base import BaseEstimator
except ImportError:  # pragma: no cover
    BaseEstimator = object

__all__ = [
    "LrcMatrix",
    "autocov_hat",
    "fit_ar1",
    "bandwidth_from_ar",
    "andrews_bandwidth",
    "lrcov_estimate",
    "theta_matrix",
    "cholesky_psd",
    "LongRunCovariance",
]

ANDREWS_CONST = 1.3221
_WEIGHT_TOL = 1e-12
_AR1_CLIP = 0.97
_SYM_TOL = 1e-12
_JITTER = 1e-10


@dataclass(frozen=True)
class LrcMatrix:
    """A long-run covariance matrix plus how it was obtained.

    Symmetry is enforced at construction (inputs asymmetric beyond 1e-12
    relative are rejected); ``np.asarray`` unwraps the values.
    """

    values: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {v.shape}")
        scale = max(1.0, float(np.max(np.abs(v))) if v.size else 1.0)
        gap = float(np.max(np.abs(v - v.T))) if v.size else 0.0
        if gap > _SYM_TOL * scale:
            raise ValueError(f"matrix is asymmetric beyond tolerance ({gap:.3g})")
        v = (v + v.T) / 2.0
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __array__(self, dtype=None):
        return np.asarray(self.values, dtype=dtype)

    @property
    def shape(self):
        return self.values.shape


def autocov_hat(series, j: int) -> np.ndarray:
    """Sample autocovariance H_hat_j of the (column-centered) series.

    Negative lags return the exact transpose of the positive lag.
    """
    x = validate_series(series)
    n = x.shape[0]
    if abs(j) >= n:
        raise ValueError(f"lag j must satisfy |j| < n = {n}, got {j}")
    if j < 0:
        return autocov_hat(series, -j).T.copy()
    xc = x - x.mean(axis=0)
    return (xc[j:].T @ xc[: n - j]) / n


def fit_ar1(column) -> tuple[float, float]:
    """AR(1) plug-in fit on a single centered column.

    Returns ``(rho_hat, sigma2_hat)`` with rho clipped to [-0.97, 0.97];
    constant columns raise :class:`DegenerateDataError`.
    """
    x = np.asarray(column, dtype=np.float64).ravel()
    n = x.size
    if n < 3:
        raise ValueError(f"AR(1) fit needs at least 3 observations, got {n}")
    if not np.isfinite(x).all():
        raise ValueError("column contains non-finite entries")
    xc = x - x.mean()
    denom = float(xc[:-1] @ xc[:-1])
    if denom <= 0.0:
        raise DegenerateDataError("zero-variance column: AR(1) fit undefined")
    rho = float(xc[1:] @ xc[:-1]) / denom
    rho = min(max(rho, -_AR1_CLIP), _AR1_CLIP)
    resid = xc[1:] - rho * xc[:-1]
    sigma2 = float(resid @ resid) / (n - 1)
    return rho, sigma2


def bandwidth_from_ar(rhos, sigma2s, n: int) -> float:
    """The plug-in bandwidth formula applied to given AR(1) summaries."""
    rhos = np.asarray(rhos, dtype=np.float64)
    s2 = np.asarray(sigma2s, dtype=np.float64)
    if rhos.shape != s2.shape or rhos.size == 0:
        raise ValueError("need matching, nonempty rho and sigma2 vectors")
    one_minus = 1.0 - rhos
    num = float(np.sum(4.0 * rhos**2 * s2**2 * one_minus**-8))
    den = float(np.sum(s2**2 * one_minus**-4))
    if den <= 0.0:
        raise DegenerateDataError("AR(1) fits carry no variance; bandwidth undefined")
    a_hat = num / den
    return max(ANDREWS_CONST * (a_hat * n) ** 0.2, ANDREWS_CONST)


def andrews_bandwidth(series) -> float:
    """Data-driven bandwidth: AR(1) summaries per column, then the plug-in rule."""
    x = validate_series(series, min_rows=3)
    fits = [fit_ar1(x[:, j]) for j in range(x.shape[1])]
    rhos = [f[0] for f in fits]
    s2s = [f[1] for f in fits]
    return bandwidth_from_ar(rhos, s2s, x.shape[0])


def _kernel_weights(kernel: KernelSpec, n: int, exact: bool) -> tuple[np.ndarray, bool]:
    w = np.asarray(kernel.weights(np.arange(n)), dtype=np.float64)
    if exact:
        return w, False
    keep = np.abs(w) >= _WEIGHT_TOL
    return np.where(keep, w, 0.0), bool((~keep).any())


def lrcov_estimate(series, kernel: KernelSpec, *, exact: bool = False) -> LrcMatrix:
    """Kernel long-run covariance estimate of ``series``.

    Lags whose kernel weight falls below 1e-12 in absolute value are skipped
    unless ``exact=True`` forces the full sum over all n-1 lags.  The result
    is symmetrized via (M + M^T)/2.
    """
    x = validate_series(series)
    n, p = x.shape
    xc = x - x.mean(axis=0)
    w, truncated = _kernel_weights(kernel, n, exact)
    if not np.any(w[1:]):
        xi = w[0] * (xc.T @ xc) / n
    else:
        s = _weighted_lag_sums(xc, w)
        c0 = xc.T @ xc
        xi = (s + s.T - w[0] * c0) / n
    xi = (xi + xi.T) / 2.0
    return LrcMatrix(
        values=xi,
        provenance={
            "method": "kernel",
            "kernel": kernel.kind,
            "bandwidth": float(kernel.bandwidth),
            "n": int(n),
            "p": int(p),
            "truncated": truncated,
        },
    )


def _weighted_lag_sums(xc: np.ndarray, w: np.ndarray) -> np.ndarray:
    """S[a, b] = sum_{j>=0} w_j sum_t xc[t, a] xc[t-j, b], via FFT cross-spectra."""
    n, p = xc.shape
    m = scipy.fft.next_fast_len(2 * n)
    nf = m // 2 + 1
    f = scipy.fft.rfft(xc, m, axis=0)
    fc = np.conj(f)
    # chunk the (nf, cols, p) spectral block to a fixed memory budget
    cols = max(1, min(p, int(64 * 2**20 / (nf * p * 16))))
    s = np.empty((p, p))
    for a0 in range(0, p, cols):
        a1 = min(p, a0 + cols)
        block = np.einsum("fa,fb->fab", f[:, a0:a1], fc)
        c = scipy.fft.irfft(block, m, axis=0)[:n]
        s[a0:a1] = np.tensordot(w, c, axes=(0, 0))
    return s


def theta_matrix(n: int, bandwidth: float) -> np.ndarray:
    """The n x n multiplier covariance: Theta[i, j] = K_QS((i - j) / b_n)."""
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if not bandwidth > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    first = qs_kernel(np.arange(n) / bandwidth)
    return scipy.linalg.toeplitz(first)


def cholesky_psd(mat: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor with the one-shot jitter policy.

    If factorization fails, 1e-10 * I is added once and retried; a second
    failure raises :class:`NumericalError`.
    """
    try:
        return np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        pass
    try:
        return np.linalg.cholesky(mat + _JITTER * np.eye(mat.shape[0]))
    except np.linalg.LinAlgError:
        eig_min = float(np.linalg.eigvalsh(mat)[0])
        raise NumericalError(
            f"matrix is not positive semidefinite even after jitter "
            f"(min eigenvalue {eig_min:.3g})"
        ) from None


class LongRunCovariance(BaseEstimator):
    """Estimator facade over :func:`lrcov_estimate` / :func:`andrews_bandwidth`.

    Parameters
    ----------
    bandwidth : float or None
        Fixed bandwidth; None selects it from the data by the plug-in rule.
    kernel : str
        "quadratic_spectral" or "custom".
    kernel_func : callable or None
        Evaluation rule when ``kernel="custom"``.
    exact : bool
        Disable the small-weight lag truncation.

    Attributes after ``fit``: ``covariance_``, ``bandwidth_``, ``provenance_``,
    ``n_samples_``, ``n_features_``.
    """

    def __init__(self, bandwidth=None, kernel="quadratic_spectral", kernel_func=None,
                 exact=False):
        self.bandwidth = bandwidth
        self.kernel = kernel
        self.kernel_func = kernel_func
        self.exact = exact

    def fit(self, X, y=None):
        x = validate_series(X)
        b = self.bandwidth if self.bandwidth is not None else andrews_bandwidth(x)
        spec = KernelSpec(bandwidth=b, kind=self.kernel, func=self.kernel_func)
        est = lrcov_estimate(x, spec, exact=self.exact)
        self.bandwidth_ = float(b)
        self.covariance_ = est.values
        self.provenance_ = est.provenance
        self.n_samples_, self.n_features_ = x.shape
        return self
