"""Gaussian multiplier draws targeting the long-run covariance.

``sample_ghat`` draws B vectors

    G_hat_b = n^{-1/2} sum_t Z_{b,t} (X_t - mean),   Z_b ~ N(0, Theta),
    Theta[i, j] = K_QS((i - j) / b_n),

whose conditional covariance given the data is exactly the (untruncated)
kernel long-run covariance estimate of the centered series.  Draw ``b`` is a
pure function of the Cholesky factor and the derived stream ``(seed, b)``,
so results do not depend on batching or worker scheduling.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .lrcov import cholesky_psd, theta_matrix
from .rng import derive_rng
from .series import save_csv, series_fingerprint, validate_series

__all__ = ["BootstrapDraws", "QuantileEstimate", "Calibration", "sample_ghat", "quantile", "calibrate"]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class BootstrapDraws:
    """B multiplier draws (rows) for a p-dimensional series."""

    draws: np.ndarray  # (B, p)
    bandwidth: float
    seed: int
    n: int
    fingerprint: str  # content hash of the source series

    @property
    def B(self) -> int:
        return self.draws.shape[0]

    def to_csv(self, path) -> None:
        """Write draws as CSV plus a ``.json`` provenance sidecar."""
        path = str(path)
        save_csv(self.draws, path, columns=[f"g{j + 1}" for j in range(self.draws.shape[1])])
        sidecar = {
            "schema_version": SCHEMA_VERSION,
            "B": int(self.B),
            "p": int(self.draws.shape[1]),
            "n": int(self.n),
            "bandwidth": float(self.bandwidth),
            "seed": int(self.seed),
            "series_fingerprint": self.fingerprint,
        }
        with open(path + ".json", "w") as fh:
            json.dump(sidecar, fh, indent=2, sort_keys=True)
            fh.write("\n")


@dataclass(frozen=True)
class QuantileEstimate:
    """An upper-delta empirical quantile: the ceil((1-delta)B)-th smallest value."""

    value: float
    delta: float
    B: int
    order_stat: int  # 1-based k


@dataclass(frozen=True)
class Calibration:
    """Bootstrap reference distribution of a scalar statistic."""

    stats: np.ndarray  # (B,) statistic per draw
    quantiles: dict = field(default_factory=dict)  # level -> QuantileEstimate

    def p_value(self, observed: float) -> float:
        """(1 + #{draws >= observed}) / (B + 1); always in (0, 1]."""
        b = self.stats.size
        return (1.0 + int(np.sum(self.stats >= observed))) / (b + 1.0)


@lru_cache(maxsize=8)
def _theta_factor(n: int, bandwidth: float) -> np.ndarray:
    return cholesky_psd(theta_matrix(n, bandwidth))


def sample_ghat(series, bandwidth: float, B: int, seed: int) -> BootstrapDraws:
    """Draw B multiplier vectors for ``series`` at the given bandwidth.

    The series is centered internally; the multiplier covariance factor is
    cached per (n, bandwidth).  Draw b consumes stream ``(seed, b)`` only.
    """
    x = validate_series(series)
    n, _ = x.shape
    if not (isinstance(B, (int, np.integer)) and B >= 1):
        raise ValueError(f"B must be a positive integer, got {B!r}")
    if not bandwidth > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    factor = _theta_factor(n, float(bandwidth))
    xc = x - x.mean(axis=0)
    e = np.empty((B, n))
    for b in range(B):
        e[b] = derive_rng(seed, b).standard_normal(n)
    ghat = (e @ factor.T) @ xc / math.sqrt(n)
    return BootstrapDraws(
        draws=ghat,
        bandwidth=float(bandwidth),
        seed=int(seed),
        n=n,
        fingerprint=series_fingerprint(x),
    )


def quantile(values, delta: float) -> QuantileEstimate:
    """Upper-delta quantile: the k-th smallest value with k = ceil((1-delta)B)."""
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise ValueError("cannot take a quantile of an empty sample")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    b = v.size
    if b < math.ceil(1.0 / delta):
        warnings.warn(
            f"only {b} draws for an upper {delta:g}-quantile; the tail is "
            "essentially unresolved",
            UserWarning,
            stacklevel=2,
        )
    k = math.ceil((1.0 - delta) * b)
    k = min(max(k, 1), b)
    value = float(np.partition(v, k - 1)[k - 1])
    return QuantileEstimate(value=value, delta=float(delta), B=b, order_stat=k)


def calibrate(series, bandwidth: float, B: int, seed: int, statistic,
              levels=(0.05,)) -> Calibration:
    """Bootstrap a scalar ``statistic`` (callable on a (B, p) draw matrix).

    Returns the per-draw statistics, their upper quantiles at ``levels``, and
    a p-value rule — all from the same draw sample, so p-values and critical
    values cannot disagree.
    """
    draws = sample_ghat(series, bandwidth, B, seed)
    stats = np.asarray(statistic(draws.draws), dtype=np.float64).ravel()
    if stats.shape != (draws.B,):
        raise ValueError(
            f"statistic must map (B, p) draws to B scalars, got shape {stats.shape}"
        )
    qs = {float(d): quantile(stats, d) for d in levels}
    return Calibration(stats=stats, quantiles=qs)
