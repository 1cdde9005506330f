"""Synthetic dependent-series generators with known ground truth.

Three generator families cover the dependence regimes the estimators are
meant to handle:

- ``ma_q``          exactly m-dependent moving averages, one independent
                    innovation stream per coordinate, shared coefficients
- ``var1``          a first-order vector autoregression (mixing-type
                    dependence), simulated past a burn-in
- ``causal_linear`` a causal linear filter with polynomially decaying
                    coefficients c_l = (l+1)^(-beta), the canonical
                    physical-dependence example; its decay exponent is
                    beta - 1

Every generator is driven by :func:`hdclt.rng.derive_rng`, so a
``(spec, n, seed)`` triple pins the output bit-for-bit.  The coupled
generator replaces, for every time point t, the innovation at lag m behind t
with an independent copy; for the linear filters the per-row difference is
exactly ``c_m * (eps' - eps)``, which is also what :func:`estimate_theta`
samples.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft
import scipy.linalg

from .lrcov import LrcMatrix
from .rng import derive_rng

__all__ = [
    "DgpSpec",
    "CoupledPair",
    "ThetaEstimate",
    "generate",
    "generate_coupled",
    "estimate_theta",
    "analytic_longrun_cov",
    "analytic_instantaneous_cov",
]

SCHEMA_VERSION = 1
_KINDS = ("ma_q", "var1", "causal_linear")
_INNOVATIONS = ("gaussian", "uniform")
_UNIFORM_HALF_WIDTH = math.sqrt(3.0)  # unit-variance centered uniform
_CAUSAL_COEF_TOL = 1e-10
_VAR1_POWER_TOL = 1e-12
_VAR1_BURNIN_BASE = 200
_VAR1_BURNIN_CAP = 10_000


@dataclass(frozen=True)
class DgpSpec:
    """Declarative description of a data-generating process.

    Use the :meth:`ma_q`, :meth:`var1` and :meth:`causal_linear` constructors
    rather than filling fields by hand.  Specs serialize to JSON (with a
    ``schema_version`` field) and round-trip through :meth:`from_dict`.
    """

    kind: str
    p: int
    innovation: str = "gaussian"
    coefficients: tuple[float, ...] | None = None  # ma_q
    transition: tuple[tuple[float, ...], ...] | None = None  # var1
    beta: float | None = None  # causal_linear
    truncation: int | None = None  # causal_linear
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown DGP kind {self.kind!r}; expected one of {_KINDS}")
        if self.innovation not in _INNOVATIONS:
            raise ValueError(
                f"unknown innovation {self.innovation!r}; expected one of {_INNOVATIONS}"
            )
        if self.kind != "var1" and not (isinstance(self.p, int) and self.p >= 1):
            raise ValueError(f"p must be a positive integer, got {self.p!r}")
        if self.kind == "ma_q":
            if not self.coefficients:
                raise ValueError("ma_q needs a nonempty coefficient sequence")
            if not all(math.isfinite(c) for c in self.coefficients):
                raise ValueError("ma_q coefficients must be finite")
        elif self.kind == "var1":
            a = np.asarray(self.transition, dtype=np.float64)
            if a.ndim != 2 or a.shape[0] != a.shape[1]:
                raise ValueError("var1 transition must be a square matrix")
            if a.shape[0] != self.p:
                raise ValueError("var1 transition size does not match p")
            rho = max(abs(np.linalg.eigvals(a))) if a.size else 0.0
            if not rho < 1.0:
                raise ValueError(
                    f"var1 transition must have spectral radius < 1, got {rho:.6g}"
                )
        else:  # causal_linear
            if self.beta is None or not (self.beta > 1.0):
                raise ValueError("causal_linear needs decay exponent beta > 1")
            if self.truncation is None:
                object.__setattr__(self, "truncation", _default_truncation(self.beta))
            if not (isinstance(self.truncation, int) and self.truncation >= 0):
                raise ValueError("truncation must be a nonnegative integer")

    # -- constructors ------------------------------------------------------

    @classmethod
    def ma_q(cls, coefficients, p, innovation="gaussian", metadata=None):
        return cls(
            kind="ma_q",
            p=int(p),
            innovation=innovation,
            coefficients=tuple(float(c) for c in coefficients),
            metadata=dict(metadata or {}),
        )

    @classmethod
    def var1(cls, transition, innovation="gaussian", metadata=None):
        a = np.asarray(transition, dtype=np.float64)
        return cls(
            kind="var1",
            p=int(a.shape[0]),
            innovation=innovation,
            transition=tuple(tuple(float(v) for v in row) for row in a),
            metadata=dict(metadata or {}),
        )

    @classmethod
    def causal_linear(cls, beta, p, truncation=None, innovation="gaussian", metadata=None):
        return cls(
            kind="causal_linear",
            p=int(p),
            innovation=innovation,
            beta=float(beta),
            truncation=None if truncation is None else int(truncation),
            metadata=dict(metadata or {}),
        )

    # -- derived views -----------------------------------------------------

    @property
    def framework(self) -> str:
        """Dependence framework this spec instantiates (used as a table label)."""
        return {"ma_q": "m_dependent", "var1": "alpha_mixing", "causal_linear": "physical"}[
            self.kind
        ]

    @property
    def dependence_range(self) -> int | None:
        """Lag beyond which coupled copies coincide (None for var1)."""
        if self.kind == "ma_q":
            return len(self.coefficients) - 1
        if self.kind == "causal_linear":
            return self.truncation
        return None

    @property
    def decay_exponent(self) -> float | None:
        """Physical-dependence decay exponent (causal_linear only)."""
        return self.beta - 1.0 if self.kind == "causal_linear" else None

    def filter_coefficients(self) -> np.ndarray:
        """Linear-filter coefficients c_0..c_L (ma_q and causal_linear)."""
        if self.kind == "ma_q":
            return np.asarray(self.coefficients, dtype=np.float64)
        if self.kind == "causal_linear":
            lags = np.arange(self.truncation + 1, dtype=np.float64)
            return (lags + 1.0) ** (-self.beta)
        raise ValueError("var1 has no finite linear-filter representation")

    def transition_matrix(self) -> np.ndarray:
        if self.kind != "var1":
            raise ValueError("transition_matrix is only defined for var1")
        return np.asarray(self.transition, dtype=np.float64)

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "p": self.p,
            "innovation": self.innovation,
        }
        if self.kind == "ma_q":
            out["coefficients"] = list(self.coefficients)
        elif self.kind == "var1":
            out["transition"] = [list(row) for row in self.transition]
        else:
            out["beta"] = self.beta
            out["truncation"] = self.truncation
        if self.metadata:
            out["metadata"] = dict(self.metadata)
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "DgpSpec":
        d = dict(d)
        version = d.pop("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ValueError(f"unsupported DgpSpec schema_version {version}")
        kind = d.pop("kind", None)
        meta = d.pop("metadata", None)
        try:
            if kind == "ma_q":
                return cls.ma_q(d.pop("coefficients"), d.pop("p"),
                                d.pop("innovation", "gaussian"), meta)
            if kind == "var1":
                d.pop("p", None)
                return cls.var1(d.pop("transition"), d.pop("innovation", "gaussian"), meta)
            if kind == "causal_linear":
                return cls.causal_linear(d.pop("beta"), d.pop("p"), d.pop("truncation", None),
                                         d.pop("innovation", "gaussian"), meta)
        except KeyError as exc:
            raise ValueError(f"DgpSpec dict is missing field {exc}") from None
        raise ValueError(f"unknown DGP kind {kind!r}")

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_json(cls, path) -> "DgpSpec":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class CoupledPair:
    """A series and its lag-m coupled copy (shared innovations except lag m)."""

    x: np.ndarray
    x_prime: np.ndarray
    lag: int


@dataclass(frozen=True)
class ThetaEstimate:
    """Monte Carlo estimate of the coordinatewise coupling norm at lag m."""

    values: np.ndarray  # theta-hat per coordinate
    se: np.ndarray  # delta-method standard errors
    m: int
    q: float
    reps: int


def _default_truncation(beta: float) -> int:
    # smallest L with c_L = (L+1)^(-beta) strictly below tol; the closed form
    # lands exactly on the tolerance when tol^(-1/beta) is an integer
    L = max(0, int(math.ceil(_CAUSAL_COEF_TOL ** (-1.0 / beta))) - 1)
    while (L + 1.0) ** (-beta) >= _CAUSAL_COEF_TOL:
        L += 1
    return L


def _innovations(spec: DgpSpec, rows: int, rng: np.random.Generator) -> np.ndarray:
    if spec.innovation == "gaussian":
        return rng.standard_normal((rows, spec.p))
    return rng.uniform(-_UNIFORM_HALF_WIDTH, _UNIFORM_HALF_WIDTH, size=(rows, spec.p))


def _apply_filter(eps: np.ndarray, coef: np.ndarray, n: int) -> np.ndarray:
    """X_t = sum_l c_l eps[t-l] for t = 1..n, given eps rows for times 1-L..n."""
    L = coef.size - 1
    if L <= 128:
        out = coef[0] * eps[L : L + n]
        for l in range(1, L + 1):
            out += coef[l] * eps[L - l : L - l + n]
        return out
    # long filters: circular FFT convolution; rows L..L+n-1 never wrap
    m = scipy.fft.next_fast_len(n + L)
    fe = scipy.fft.rfft(eps, m, axis=0)
    fc = scipy.fft.rfft(coef, m)
    full = scipy.fft.irfft(fe * fc[:, None], m, axis=0)
    return np.ascontiguousarray(full[L : L + n])


def _var1_burnin(a: np.ndarray) -> int:
    power = a.copy()
    k = 1
    while np.linalg.norm(power, 2) >= _VAR1_POWER_TOL and k < _VAR1_BURNIN_CAP:
        power = power @ a
        k += 1
    return _VAR1_BURNIN_BASE + k


def generate(spec: DgpSpec, n: int, seed: int) -> np.ndarray:
    """Simulate ``n`` rows from ``spec``; deterministic in ``(spec, n, seed)``."""
    if not (isinstance(n, (int, np.integer)) and n >= 2):
        raise ValueError(f"n must be an integer >= 2, got {n!r}")
    rng = derive_rng(seed)
    if spec.kind == "var1":
        a = spec.transition_matrix()
        burn = _var1_burnin(a)
        eps = _innovations(spec, burn + n, rng)
        x = np.empty((burn + n, spec.p))
        state = np.zeros(spec.p)
        for t in range(burn + n):
            state = a @ state + eps[t]
            x[t] = state
        return x[burn:]
    coef = spec.filter_coefficients()
    eps = _innovations(spec, coef.size - 1 + n, rng)
    return _apply_filter(eps, coef, n)


def generate_coupled(spec: DgpSpec, n: int, m: int, seed: int) -> CoupledPair:
    """Simulate a series and its lag-m coupled copy.

    ``x`` is bit-identical to ``generate(spec, n, seed)``.  In ``x_prime``,
    every row t sees an independent copy of the innovation at time t - m;
    rows that the coupled innovation never enters (m beyond the filter
    length) are bit-identical across the pair.
    """
    if spec.kind == "var1":
        raise ValueError(
            "coupled generation needs a finite innovation filter; var1 is unsupported"
        )
    if not (0 <= m < n):
        raise ValueError(f"coupling lag must satisfy 0 <= m < n, got m={m}")
    coef = spec.filter_coefficients()
    L = coef.size - 1
    eps = _innovations(spec, L + n, derive_rng(seed))
    x = _apply_filter(eps, coef, n)
    if m > L:
        return CoupledPair(x=x, x_prime=x.copy(), lag=m)
    eps_prime = _innovations(spec, L + n, derive_rng(seed, 1))
    delta = eps_prime[L - m : L - m + n] - eps[L - m : L - m + n]
    return CoupledPair(x=x, x_prime=x + coef[m] * delta, lag=m)


def estimate_theta(spec: DgpSpec, m: int, q: float, reps: int, seed: int) -> ThetaEstimate:
    """Monte Carlo estimate of the lag-m coupling norm per coordinate.

    For the linear generators the coupled difference at any post-burn-in time
    is exactly ``c_m * (eps - eps')``, so the estimator samples that law
    directly — O(reps * p) work even when the filter is long.  Standard
    errors come from the delta method on the q-th moment.
    """
    if spec.kind == "var1":
        raise ValueError(
            "coupled generation needs a finite innovation filter; var1 is unsupported"
        )
    if m < 0:
        raise ValueError("coupling lag m must be nonnegative")
    if q < 1:
        raise ValueError("q must be at least 1")
    if reps < 100:
        raise ValueError("reps must be at least 100 for a usable standard error")
    coef = spec.filter_coefficients()
    cm = coef[m] if m < coef.size else 0.0
    if cm == 0.0:
        zero = np.zeros(spec.p)
        return ThetaEstimate(values=zero, se=zero.copy(), m=m, q=q, reps=reps)
    rng = derive_rng(seed)
    eps = _innovations(spec, reps, rng)
    eps_prime = _innovations(spec, reps, rng)
    moment = np.abs(cm * (eps - eps_prime)) ** q
    mean_q = moment.mean(axis=0)
    se_q = moment.std(axis=0, ddof=1) / math.sqrt(reps)
    values = mean_q ** (1.0 / q)
    se = se_q * values ** (1.0 - q) / q
    return ThetaEstimate(values=values, se=se, m=m, q=q, reps=reps)


def _filter_autocov(coef: np.ndarray) -> np.ndarray:
    """Gamma(k) = sum_l c_l c_{l+k} for k = 0..L (unit innovation variance)."""
    full = np.correlate(coef, coef, mode="full")
    return full[coef.size - 1 :]


def analytic_longrun_cov(spec: DgpSpec, n: int) -> LrcMatrix:
    """Exact covariance of the scaled row sum n^{-1/2} sum_t X_t under ``spec``.

    Linear filters: V_n = Gamma(0) + 2 sum_{k>=1} (1 - k/n) Gamma(k), identical
    across coordinates.  var1: Gamma(0) from the discrete Lyapunov equation and
    Gamma(k) = A^k Gamma(0), the power series truncated once ||A^k|| < 1e-12.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if spec.kind == "var1":
        a = spec.transition_matrix()
        gamma0 = scipy.linalg.solve_discrete_lyapunov(a, np.eye(spec.p))
        xi = gamma0.copy()
        power = a.copy()
        for k in range(1, n):
            if np.linalg.norm(power, 2) < _VAR1_POWER_TOL:
                break
            gk = power @ gamma0
            xi += (1.0 - k / n) * (gk + gk.T)
            power = power @ a
        xi = (xi + xi.T) / 2.0
    else:
        coef = spec.filter_coefficients()
        gamma = _filter_autocov(coef)
        kmax = min(coef.size - 1, n - 1)
        ks = np.arange(1, kmax + 1)
        v = gamma[0] + 2.0 * np.sum((1.0 - ks / n) * gamma[1 : kmax + 1])
        xi = v * np.eye(spec.p)
    return LrcMatrix(
        values=xi,
        provenance={"method": "analytic", "kind": spec.kind, "n": int(n)},
    )


def analytic_instantaneous_cov(spec: DgpSpec) -> np.ndarray:
    """Exact Cov(X_t) under ``spec`` (stationary regime)."""
    if spec.kind == "var1":
        a = spec.transition_matrix()
        return scipy.linalg.solve_discrete_lyapunov(a, np.eye(spec.p))
    coef = spec.filter_coefficients()
    return float(coef @ coef) * np.eye(spec.p)
