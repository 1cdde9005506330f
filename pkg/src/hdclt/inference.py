"""Bootstrap-calibrated max-of-sums tests and covariance confidence regions.

All tests share one scalar reduction: the sparse max-of-sums statistic

    T(v; s, a) = max_{j_1 < ... < j_s} sum_k a_k v_{j_k}^2

computed by dynamic programming (positional weight a_k binds to the k-th
smallest chosen index; with equal weights this is the sum of the s largest
squares).  Critical values come from multiplier draws whose conditional law
matches the kernel long-run covariance of the relevant series:

- mean test           studentized row means vs. studentized draws
- white-noise test    the mean test applied to lagged outer-product rows
- changepoint test    an unstudentized CUSUM vector vs. draws for the
                      weighted sequence 2 (n-1)^{-1} (n - 2t + 1) X_t
- confidence region   max-of-sums ball around the sample covariances over an
                      index set, calibrated on draws scaled back by sqrt(n)
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .bootstrap import quantile, sample_ghat
from .exceptions import DegenerateDataError
from .kernels import KernelSpec
from .lrcov import andrews_bandwidth, lrcov_estimate
from .series import validate_series

__all__ = [
    "tns_statistic",
    "TestReport",
    "ConfRegion",
    "mean_test",
    "whitenoise_embed",
    "whitenoise_test",
    "cusum_vector",
    "changepoint_test",
    "cov_confidence_region",
]

SCHEMA_VERSION = 1


def _check_weights(weights, s: int) -> np.ndarray | None:
    if weights is None:
        return None
    a = np.asarray(weights, dtype=np.float64).ravel()
    if a.shape != (s,):
        raise ValueError(f"need exactly s={s} weights, got {a.size}")
    if not np.all(a > 0) or not np.isfinite(a).all():
        raise ValueError("weights must be positive finite reals")
    return a


def tns_batch(rows, s: int, weights=None) -> np.ndarray:
    """The max-of-sums statistic applied to every row of a (B, p) matrix."""
    v = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    b, p = v.shape
    if not (isinstance(s, (int, np.integer)) and 1 <= s <= p):
        raise ValueError(f"s must satisfy 1 <= s <= p = {p}, got {s!r}")
    a = _check_weights(weights, s)
    sq = v * v
    if a is None or np.all(a == a[0]):
        scale = 1.0 if a is None else float(a[0])
        top = np.partition(sq, p - s, axis=1)[:, p - s :]
        return scale * top.sum(axis=1)
    f = np.full((b, s + 1), -np.inf)
    f[:, 0] = 0.0
    for i in range(p):
        f[:, 1:] = np.maximum(f[:, 1:], f[:, :-1] + a * sq[:, i : i + 1])
    return f[:, s]


def tns_statistic(v, s: int, weights=None) -> float:
    """Scalar max-of-sums statistic of a single vector."""
    arr = np.asarray(v, dtype=np.float64).ravel()
    return float(tns_batch(arr[None, :], s, weights)[0])


@dataclass(frozen=True)
class TestReport:
    """Outcome of a bootstrap-calibrated test.

    ``reject`` is derived, never stored: it is true exactly when the observed
    statistic exceeds the critical value.
    """

    test: str
    statistic: float
    critical_value: float
    p_value: float
    config: dict = field(default_factory=dict)

    @property
    def reject(self) -> bool:
        return self.statistic > self.critical_value

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "test": self.test,
            "statistic": self.statistic,
            "critical_value": self.critical_value,
            "p_value": self.p_value,
            "reject": self.reject,
            "config": dict(self.config),
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _resolve_bandwidth(x: np.ndarray, bandwidth) -> float:
    if bandwidth is None:
        return andrews_bandwidth(x)
    if not bandwidth > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    return float(bandwidth)


def _studentized_test(x: np.ndarray, s: int, weights, delta: float, B: int,
                      seed: int, bandwidth, test_name: str, extra: dict) -> TestReport:
    n, p = x.shape
    a = _check_weights(weights, s)
    b_n = _resolve_bandwidth(x, bandwidth)
    xi = lrcov_estimate(x, KernelSpec(bandwidth=b_n)).values
    diag = np.diag(xi).copy()
    if np.min(diag) <= 0.0:
        j = int(np.argmin(diag))
        raise DegenerateDataError(
            f"long-run variance of coordinate {j} is not positive ({diag[j]:.3g})"
        )
    scale = np.sqrt(diag)
    observed = tns_statistic(math.sqrt(n) * x.mean(axis=0) / scale, s, a)
    draws = sample_ghat(x, b_n, B, seed)
    stats = tns_batch(draws.draws / scale, s, a)
    q = quantile(stats, delta)
    p_value = (1.0 + int(np.sum(stats >= observed))) / (B + 1.0)
    config = {
        "s": int(s),
        "weights": None if a is None else [float(v) for v in a],
        "delta": float(delta),
        "B": int(B),
        "bandwidth": float(b_n),
        "seed": int(seed),
        "n": int(n),
        "p": int(p),
        **extra,
    }
    return TestReport(test=test_name, statistic=observed,
                      critical_value=q.value, p_value=p_value, config=config)


def mean_test(series, s: int, weights=None, delta: float = 0.05, B: int = 1000,
              seed: int = 0, bandwidth=None) -> TestReport:
    """Test H0: E(X_t) = 0 via the studentized max-of-sums statistic.

    The observed vector is sqrt(n) * colmean / sqrt(diag(Xi_hat)); multiplier
    draws are studentized by the same diagonal, so the scale cancels from the
    decision.
    """
    x = validate_series(series, min_rows=3)
    return _studentized_test(x, s, weights, delta, B, seed, bandwidth, "mean", {})


def whitenoise_embed(eps, K: int) -> np.ndarray:
    """Rows of lagged outer products: row t is vec(e_{t+k} e_t^T) for k = 1..K.

    The embedded series has n - K rows and d^2 K columns (row-major vec);
    its mean vector collects the lag-1..K autocovariances of ``eps``.
    """
    e = validate_series(eps)
    n, d = e.shape
    if not (isinstance(K, (int, np.integer)) and K >= 1):
        raise ValueError(f"K must be a positive integer, got {K!r}")
    n1 = n - K
    if n1 < 2:
        raise ValueError(f"need n - K >= 2 rows after embedding, got {n1}")
    blocks = [
        np.einsum("ti,tj->tij", e[k : k + n1], e[:n1]).reshape(n1, d * d)
        for k in range(1, K + 1)
    ]
    return np.concatenate(blocks, axis=1)


def whitenoise_test(eps, K: int, s: int, weights=None, delta: float = 0.05,
                    B: int = 1000, seed: int = 0, bandwidth=None) -> TestReport:
    """Test H0: eps is white noise, via the mean test on the embedded series."""
    e = validate_series(eps)
    emb = whitenoise_embed(e, K)
    if emb.shape[0] < 3:
        raise ValueError("series too short for the white-noise embedding")
    return _studentized_test(
        emb, s, weights, delta, B, seed, bandwidth, "whitenoise",
        {"K": int(K), "d": int(e.shape[1])},
    )


def cusum_vector(series) -> np.ndarray:
    """W_n = 2 n^{-1/2} (n-1)^{-1} sum_t (n - 2t + 1) X_t.

    The weights sum to zero, so W_n ignores any constant mean level.
    """
    x = validate_series(series, min_rows=3)
    n = x.shape[0]
    w = n - 2.0 * np.arange(1, n + 1) + 1.0
    return 2.0 / (math.sqrt(n) * (n - 1)) * (w @ x)


def changepoint_test(series, s: int, delta: float = 0.05, B: int = 1000,
                     seed: int = 0, bandwidth=None) -> TestReport:
    """Test H0: no mean shift, using the CUSUM vector with equal weights.

    Draws are calibrated on the weighted sequence 2 (n-1)^{-1} (n - 2t + 1)
    X_t of the column-centered series (same scaled sum as W_n, since the
    weights cancel any constant level), with its own plug-in bandwidth.
    """
    x = validate_series(series, min_rows=3)
    n, p = x.shape
    w_obs = cusum_vector(x)
    observed = tns_statistic(w_obs, s, None)
    wts = n - 2.0 * np.arange(1, n + 1) + 1.0
    weighted = (2.0 / (n - 1)) * wts[:, None] * (x - x.mean(axis=0))
    b_n = _resolve_bandwidth(weighted, bandwidth)
    draws = sample_ghat(weighted, b_n, B, seed)
    stats = tns_batch(draws.draws, s, None)
    q = quantile(stats, delta)
    p_value = (1.0 + int(np.sum(stats >= observed))) / (B + 1.0)
    config = {
        "s": int(s),
        "weights": None,
        "delta": float(delta),
        "B": int(B),
        "bandwidth": float(b_n),
        "seed": int(seed),
        "n": int(n),
        "p": int(p),
    }
    return TestReport(test="changepoint", statistic=observed,
                      critical_value=q.value, p_value=p_value, config=config)


@dataclass(frozen=True)
class ConfRegion:
    """Max-of-sums confidence region for covariances over an index set.

    A candidate vector xi belongs to the region when
    ``tns_statistic(center - xi, s, weights) <= radius``.
    """

    center: np.ndarray  # sigma-hat over the index set
    radius: float
    s: int
    weights: tuple | None
    delta: float
    pairs: tuple
    config: dict = field(default_factory=dict)

    def contains(self, xi) -> bool:
        v = np.asarray(xi, dtype=np.float64).ravel()
        if v.shape != self.center.shape:
            raise ValueError(
                f"candidate has {v.size} entries, region is over {self.center.size}"
            )
        return tns_statistic(self.center - v, self.s, self.weights) <= self.radius

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "center": [float(v) for v in self.center],
            "radius": float(self.radius),
            "s": int(self.s),
            "weights": None if self.weights is None else [float(v) for v in self.weights],
            "delta": float(self.delta),
            "pairs": [list(map(int, ij)) for ij in self.pairs],
            "config": dict(self.config),
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def cov_confidence_region(series, pairs, s: int, weights=None, delta: float = 0.1,
                          B: int = 1000, seed: int = 0, bandwidth=None) -> ConfRegion:
    """Confidence region for Cov(Y_t) entries over an index set.

    ``series`` is assumed mean-zero (the covariance estimator is the plain
    average of products).  The deviation sequence Y_{t,i} Y_{t,j} - center is
    exactly mean-zero, its multiplier draws approximate the law of
    sqrt(n) (sigma-hat - sigma), and the radius is the upper-delta quantile
    of the statistic applied to draws / sqrt(n) — directly comparable to the
    membership sums of squared deviations.
    """
    y = validate_series(series, min_rows=3)
    n, d = y.shape
    pairs = tuple((int(i), int(j)) for i, j in pairs)
    if not pairs:
        raise ValueError("need at least one index pair")
    for i, j in pairs:
        if not (0 <= i < d and 0 <= j < d):
            raise ValueError(f"pair ({i}, {j}) out of range for {d} columns")
    if len(set(pairs)) != len(pairs):
        raise ValueError("index pairs must be distinct")
    a = _check_weights(weights, s)
    rows_i = [i for i, _ in pairs]
    rows_j = [j for _, j in pairs]
    prods = y[:, rows_i] * y[:, rows_j]
    center = prods.mean(axis=0)
    dev = prods - center
    b_n = _resolve_bandwidth(dev, bandwidth)
    draws = sample_ghat(dev, b_n, B, seed)
    stats = tns_batch(draws.draws / math.sqrt(n), s, a)
    q = quantile(stats, delta)
    config = {
        "s": int(s),
        "weights": None if a is None else [float(v) for v in a],
        "delta": float(delta),
        "B": int(B),
        "bandwidth": float(b_n),
        "seed": int(seed),
        "n": int(n),
        "d": int(d),
    }
    return ConfRegion(
        center=center,
        radius=q.value,
        s=int(s),
        weights=None if a is None else tuple(float(v) for v in a),
        delta=float(delta),
        pairs=pairs,
        config=config,
    )
