"""Smoothing kernels for long-run covariance estimation.

The workhorse is the quadratic spectral kernel

    K(x) = 25 / (12 pi^2 x^2) * { sin(6 pi x / 5) / (6 pi x / 5) - cos(6 pi x / 5) }

with K(0) = 1.  It is even, bounded by 1 in absolute value, and its induced
lag-weight matrices are positive semidefinite, which is what makes the
multiplier bootstrap draws well defined.

Near the origin the closed form divides two vanishing quantities, so below
``_SERIES_CUTOFF`` the evaluation switches to the Taylor expansion

    K(x) = 25/(12 pi^2) * sum_{k>=1} (-1)^(k+1) (6 pi/5)^(2k) (2k)/(2k+1)! x^(2k-2)

truncated after four terms (truncation error far below 1e-16 at the cutoff).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = ["qs_kernel", "KernelSpec"]

_SERIES_CUTOFF = 1e-4
# Coefficients of x^(2k-2), k = 1..4, including the 25/(12 pi^2) prefactor.
_SERIES_COEF = [
    25.0 / (12.0 * math.pi**2)
    * (-1.0) ** (k + 1)
    * (6.0 * math.pi / 5.0) ** (2 * k)
    * (2 * k)
    / math.factorial(2 * k + 1)
    for k in range(1, 5)
]


def _qs_direct(ax: np.ndarray) -> np.ndarray:
    """Closed form, valid away from 0; ``ax`` must be positive."""
    y = 1.2 * math.pi * ax
    return 25.0 / (12.0 * math.pi**2 * ax * ax) * (np.sin(y) / y - np.cos(y))


def _qs_series(ax: np.ndarray) -> np.ndarray:
    """Taylor expansion around 0 (four terms); accurate for |x| << 1."""
    x2 = ax * ax
    out = np.full_like(ax, _SERIES_COEF[0])
    pw = np.ones_like(ax)
    for c in _SERIES_COEF[1:]:
        pw = pw * x2
        out += c * pw
    return out


def qs_kernel(x):
    """Quadratic spectral kernel, elementwise.

    Accepts a scalar or array; evenness is exact because the evaluation only
    sees ``|x|``.
    """
    ax = np.abs(np.asarray(x, dtype=np.float64))
    scalar = ax.ndim == 0
    ax = np.atleast_1d(ax)
    out = np.empty_like(ax)
    small = ax < _SERIES_CUTOFF
    if small.any():
        out[small] = _qs_series(ax[small])
    if (~small).any():
        out[~small] = _qs_direct(ax[~small])
    return float(out[0]) if scalar else out.reshape(np.shape(x))


def _check_custom_kernel(func: Callable) -> None:
    if abs(float(func(0.0)) - 1.0) > 1e-12:
        raise ValueError("custom kernel must satisfy K(0) = 1")
    pts = np.geomspace(1e-3, 10.0, 32)
    kp = np.asarray([float(func(v)) for v in pts])
    km = np.asarray([float(func(-v)) for v in pts])
    if np.max(np.abs(kp - km)) > 1e-12:
        raise ValueError("custom kernel must be even (checked at 64 sample points)")
    if np.max(np.abs(np.concatenate([kp, km]))) > 1.0 + 1e-12:
        raise ValueError("custom kernel must satisfy |K(x)| <= 1")


@dataclass(frozen=True)
class KernelSpec:
    """A kernel together with its bandwidth.

    ``kind`` is ``"quadratic_spectral"`` (default) or ``"custom"``; custom
    kernels supply an evaluation rule that is sanity-checked at construction.
    """

    bandwidth: float
    kind: str = "quadratic_spectral"
    func: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        if not (self.bandwidth > 0 and math.isfinite(self.bandwidth)):
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")
        if self.kind == "quadratic_spectral":
            if self.func is not None:
                raise ValueError("func is only accepted for kind='custom'")
        elif self.kind == "custom":
            if self.func is None:
                raise ValueError("kind='custom' requires an evaluation rule")
            _check_custom_kernel(self.func)
        else:
            raise ValueError(f"unknown kernel kind: {self.kind!r}")

    def weights(self, lags) -> np.ndarray:
        """Evaluate K(lag / bandwidth) elementwise."""
        x = np.asarray(lags, dtype=np.float64) / self.bandwidth
        if self.kind == "quadratic_spectral":
            return np.atleast_1d(qs_kernel(x))
        return np.asarray([float(self.func(v)) for v in np.atleast_1d(x)])
