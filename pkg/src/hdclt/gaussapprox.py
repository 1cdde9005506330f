"""Monte Carlo laboratory for the Gaussian / bootstrap approximation quality.

Each experiment measures, on generators with known structure, a quantity the
rest of the package relies on being small:

- ``empirical_rho``   sup over a hyper-rectangle family of the gap between
                      the law of the scaled row sum and its Gaussian limit
- ``bootstrap_rho``   the same gap against multiplier-draw laws, averaged
                      over data replicates
- ``delta_nr``        sup-norm error of the kernel long-run covariance
                      estimate against its analytic target
- ``rate_sweep``      tables of either metric across sample sizes and specs
- ``monte_carlo_rate``/``region_coverage``  rejection-rate and coverage
                      experiments for the bootstrap tests

Replicate r of any experiment draws from the derived stream (seed, 0, r), so
results are reproducible regardless of worker count or completion order;
aggregation is a deterministic reduction over replicate index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed
from scipy.special import ndtri

from .dgp import (
    DgpSpec,
    _innovations,
    analytic_instantaneous_cov,
    analytic_longrun_cov,
    generate,
)
from .inference import cov_confidence_region
from .kernels import KernelSpec
from .lrcov import andrews_bandwidth, cholesky_psd, lrcov_estimate
from .bootstrap import sample_ghat
from .rng import derive_rng, derive_seed
from .series import validate_series

__all__ = [
    "RectFamily",
    "RhoEstimate",
    "DeltaEstimate",
    "RateTable",
    "RateSummary",
    "CoverageSummary",
    "empirical_rho",
    "bootstrap_rho",
    "delta_for_series",
    "delta_nr",
    "rate_sweep",
    "monte_carlo_rate",
    "region_coverage",
]

_POINT_CHUNK = 4096


@dataclass(frozen=True)
class RectFamily:
    """A finite family of axis-aligned boxes (±inf bounds allowed)."""

    lower: np.ndarray  # (count, p)
    upper: np.ndarray  # (count, p)
    kind: str

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=np.float64)
        up = np.asarray(self.upper, dtype=np.float64)
        if lo.shape != up.shape or lo.ndim != 2:
            raise ValueError("lower/upper must be matching (count, p) arrays")
        if np.any(lo > up):
            raise ValueError("every box needs lower <= upper")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @property
    def count(self) -> int:
        return self.lower.shape[0]

    @property
    def dim(self) -> int:
        return self.lower.shape[1]

    def contains(self, points) -> np.ndarray:
        """Boolean (npoints, count) membership matrix."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if pts.shape[1] != self.dim:
            raise ValueError(f"points have {pts.shape[1]} coords, boxes have {self.dim}")
        out = np.empty((pts.shape[0], self.count), dtype=bool)
        for lo in range(0, pts.shape[0], _POINT_CHUNK):
            hi = min(pts.shape[0], lo + _POINT_CHUNK)
            block = pts[lo:hi, None, :]
            out[lo:hi] = ((block >= self.lower) & (block <= self.upper)).all(axis=2)
        return out

    def rates(self, points) -> np.ndarray:
        """Fraction of points inside each box."""
        return self.contains(points).mean(axis=0)

    # -- constructors ------------------------------------------------------

    @classmethod
    def max_rect(cls, xi, count: int = 41, q_range=(0.5, 0.999)) -> "RectFamily":
        """Boxes {x : max_j |x_j| <= u} with u on a Gaussian-quantile grid.

        Thresholds are sigma_max * ndtri((1+q)/2) for q on a uniform grid
        over ``q_range`` — i.e. per-coordinate two-sided masses from 50% to
        99.9% by default.
        """
        diag = np.diag(np.asarray(xi, dtype=np.float64))
        sigma = math.sqrt(float(np.max(diag)))
        qs = np.linspace(q_range[0], q_range[1], count)
        u = sigma * ndtri((1.0 + qs) / 2.0)
        p = diag.size
        return cls(
            lower=np.repeat(-u[:, None], p, axis=1),
            upper=np.repeat(u[:, None], p, axis=1),
            kind=f"max_rect({count})",
        )

    @classmethod
    def random_rect(cls, xi, count: int = 200, seed: int = 0,
                    max_active: int = 8, prob_range=(0.001, 0.999)) -> "RectFamily":
        """Random boxes, each constraining a small random coordinate subset.

        Bounds are N(0, diag(xi)) quantiles at uniformly drawn probabilities;
        unconstrained coordinates get ±inf.  Full-dimension boxes would carry
        vanishing mass in high dimension, hence the subset cap.
        """
        diag = np.diag(np.asarray(xi, dtype=np.float64))
        p = diag.size
        sig = np.sqrt(diag)
        rng = derive_rng(seed)
        lower = np.full((count, p), -np.inf)
        upper = np.full((count, p), np.inf)
        lo_p, hi_p = prob_range
        for b in range(count):
            k = int(rng.integers(1, min(p, max_active) + 1))
            coords = rng.choice(p, size=k, replace=False)
            probs = np.sort(rng.uniform(lo_p, hi_p, size=(k, 2)), axis=1)
            bounds = ndtri(probs) * sig[coords, None]
            lower[b, coords] = bounds[:, 0]
            upper[b, coords] = bounds[:, 1]
        return cls(lower=lower, upper=upper, kind=f"random_rect({count})")

    @classmethod
    def default(cls, xi, seed: int = 0, max_count: int = 41,
                random_count: int = 200) -> "RectFamily":
        """The standard evaluation family: max-rect grid plus random boxes."""
        a = cls.max_rect(xi, count=max_count)
        b = cls.random_rect(xi, count=random_count, seed=seed)
        return cls(
            lower=np.vstack([a.lower, b.lower]),
            upper=np.vstack([a.upper, b.upper]),
            kind=f"{a.kind}+{b.kind}",
        )


@dataclass(frozen=True)
class RhoEstimate:
    """Estimated sup-discrepancy over a box family, with its MC resolution."""

    value: float
    se: float
    n: int
    p: int
    reps: int
    framework: str
    family: str
    config: dict = field(default_factory=dict)


@dataclass(frozen=True)
class DeltaEstimate:
    """Quartiles of the sup-norm long-run covariance estimation error."""

    median: float
    q25: float
    q75: float
    n: int
    p: int
    reps: int
    framework: str


@dataclass(frozen=True)
class RateSummary:
    """A Monte Carlo event rate (rejection, coverage, ...) with binomial se."""

    rate: float
    se: float
    reps: int
    outcomes: np.ndarray


@dataclass(frozen=True)
class CoverageSummary:
    """Coverage of a confidence region across replicates."""

    coverage: float
    se: float
    reps: int
    outcomes: np.ndarray
    truth: np.ndarray


@dataclass(frozen=True)
class RateTable:
    """Rows of rate-experiment results with a fixed CSV column order."""

    rows: tuple
    columns = ("n", "p", "framework", "metric", "value", "se", "reps", "seed")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(self.columns) + "\n")
            for row in self.rows:
                fh.write(",".join(self._fmt(row[c]) for c in self.columns) + "\n")

    @staticmethod
    def _fmt(v) -> str:
        if isinstance(v, float):
            return repr(v)
        return str(v)


def _chunked(fn, reps: int, n_jobs, chunk: int = 32):
    ranges = [(lo, min(lo + chunk, reps)) for lo in range(0, reps, chunk)]
    if n_jobs in (None, 1):
        return [fn(lo, hi) for lo, hi in ranges]
    return Parallel(n_jobs=n_jobs)(delayed(fn)(lo, hi) for lo, hi in ranges)


def _scaled_sums(spec: DgpSpec, n: int, reps: int, seed: int, n_jobs) -> np.ndarray:
    """Replicates of n^{-1/2} sum_t X_t; replicate r uses stream (seed, 0, r).

    For linear-filter specs the row sum is computed as w @ eps with the
    cumulative filter weights w (sum_t X_t is linear in the innovations),
    skipping the materialized series; var1 falls back to plain generation.
    Each replicate consumes its stream exactly as ``generate`` would.
    """
    if spec.kind == "var1":
        def block(lo, hi):
            out = np.empty((hi - lo, spec.p))
            for i, r in enumerate(range(lo, hi)):
                out[i] = generate(spec, n, derive_seed(seed, 0, r)).sum(axis=0)
            return out
    else:
        coef = spec.filter_coefficients()
        # weight of innovation row k in sum_t X_t: X_t = sum_l c_l eps[L+t-l]
        w = np.convolve(np.ones(n), coef, mode="full")[::-1].copy()

        def block(lo, hi):
            out = np.empty((hi - lo, spec.p))
            for i, r in enumerate(range(lo, hi)):
                rng = derive_rng(derive_seed(seed, 0, r))
                out[i] = w @ _innovations(spec, w.size, rng)
            return out

    parts = _chunked(block, reps, n_jobs, chunk=256)
    return np.vstack(parts) / math.sqrt(n)


def empirical_rho(spec: DgpSpec, n: int, reps: int, seed: int,
                  family: RectFamily | None = None, n_jobs=1) -> RhoEstimate:
    """Sup over the box family of |P(S in A) - P(G in A)|, both estimated
    from ``reps`` independent draws (G uses the analytic long-run covariance).

    The reported ``se`` is the conservative binomial bound 2 sqrt(0.25/reps).
    """
    xi = analytic_longrun_cov(spec, n).values
    if family is None:
        family = RectFamily.default(xi, seed=derive_seed(seed, 2))
    s_draws = _scaled_sums(spec, n, reps, seed, n_jobs)
    factor = cholesky_psd(xi)
    g_draws = derive_rng(seed, 1).standard_normal((reps, spec.p)) @ factor.T
    gap = np.abs(family.rates(s_draws) - family.rates(g_draws))
    return RhoEstimate(
        value=float(gap.max()),
        se=2.0 * math.sqrt(0.25 / reps),
        n=int(n),
        p=spec.p,
        reps=int(reps),
        framework=spec.framework,
        family=family.kind,
        config={"seed": int(seed), "metric": "rho"},
    )


def bootstrap_rho(spec: DgpSpec, n: int, reps_ref: int, data_reps: int, B: int,
                  seed: int, family: RectFamily | None = None, n_jobs=1) -> RhoEstimate:
    """Sup over boxes of the mean absolute gap between the reference law of
    the scaled sum and per-dataset multiplier-draw laws.

    ``reps_ref`` independent sums estimate P(S in A); each of ``data_reps``
    datasets contributes P(G_hat in A | data) from B draws at its own plug-in
    bandwidth.  The se combines the reference binomial bound with the
    replicate scatter at the maximizing box.
    """
    xi = analytic_longrun_cov(spec, n).values
    if family is None:
        family = RectFamily.default(xi, seed=derive_seed(seed, 2))
    ref = family.rates(_scaled_sums(spec, n, reps_ref, seed, n_jobs))

    def block(lo, hi):
        rows = np.empty((hi - lo, family.count))
        for i, r in enumerate(range(lo, hi)):
            x = generate(spec, n, derive_seed(seed, 3, r))
            b_n = andrews_bandwidth(x)
            draws = sample_ghat(x, b_n, B, derive_seed(seed, 4, r))
            rows[i] = family.rates(draws.draws)
        return rows

    boot = np.vstack(_chunked(block, data_reps, n_jobs, chunk=8))
    diffs = np.abs(boot - ref)  # (data_reps, count)
    mean_gap = diffs.mean(axis=0)
    best = int(np.argmax(mean_gap))
    scatter = float(diffs[:, best].std(ddof=1)) if data_reps > 1 else 0.5
    se = 2.0 * math.sqrt(0.25 / reps_ref + scatter**2 / data_reps)
    return RhoEstimate(
        value=float(mean_gap[best]),
        se=se,
        n=int(n),
        p=spec.p,
        reps=int(data_reps),
        framework=spec.framework,
        family=family.kind,
        config={"seed": int(seed), "metric": "bootstrap_rho",
                "B": int(B), "reps_ref": int(reps_ref)},
    )


def delta_for_series(series, xi_true, bandwidth=None) -> float:
    """Sup-norm error of the kernel estimate on one series."""
    x = validate_series(series)
    b_n = andrews_bandwidth(x) if bandwidth is None else float(bandwidth)
    est = lrcov_estimate(x, KernelSpec(bandwidth=b_n))
    return float(np.max(np.abs(est.values - np.asarray(xi_true))))


def delta_nr(spec: DgpSpec, n: int, reps: int, seed: int,
             bandwidth=None, n_jobs=1) -> DeltaEstimate:
    """Median and quartiles of the sup-norm estimation error over replicates."""
    xi = analytic_longrun_cov(spec, n).values

    def block(lo, hi):
        return [
            delta_for_series(generate(spec, n, derive_seed(seed, 0, r)), xi, bandwidth)
            for r in range(lo, hi)
        ]

    deltas = np.concatenate([np.asarray(b) for b in _chunked(block, reps, n_jobs)])
    q25, med, q75 = np.percentile(deltas, [25.0, 50.0, 75.0])
    return DeltaEstimate(
        median=float(med), q25=float(q25), q75=float(q75),
        n=int(n), p=spec.p, reps=int(reps), framework=spec.framework,
    )


def rate_sweep(specs, ns, reps: int, seed: int, metric: str = "rho",
               family_kwargs: dict | None = None, n_jobs=1) -> RateTable:
    """Run ``empirical_rho`` (or ``delta_nr``) over a specs x sample-sizes grid.

    Each grid cell gets its own derived seed, recorded in its row.
    """
    if metric not in ("rho", "delta"):
        raise ValueError(f"metric must be 'rho' or 'delta', got {metric!r}")
    rows = []
    for si, spec in enumerate(specs):
        for ni, n in enumerate(ns):
            cell_seed = derive_seed(seed, 5, si, ni)
            if metric == "rho":
                family = None
                if family_kwargs:
                    xi = analytic_longrun_cov(spec, n).values
                    family = RectFamily.default(
                        xi, seed=derive_seed(cell_seed, 2), **family_kwargs
                    )
                est = empirical_rho(spec, n, reps, cell_seed, family=family,
                                    n_jobs=n_jobs)
                value, se = est.value, est.se
            else:
                est = delta_nr(spec, n, reps, cell_seed, n_jobs=n_jobs)
                iqr = est.q75 - est.q25
                value = est.median
                # normal-approximation se of a median from the IQR
                se = 1.2533 * (iqr / 1.349) / math.sqrt(reps)
            rows.append({
                "n": int(n), "p": spec.p, "framework": spec.framework,
                "metric": metric, "value": float(value), "se": float(se),
                "reps": int(reps), "seed": int(cell_seed),
            })
    return RateTable(rows=tuple(rows))


def monte_carlo_rate(task, reps: int, seed: int, n_jobs=1) -> RateSummary:
    """Event rate of ``task(replicate_seed) -> bool`` over derived streams."""

    def block(lo, hi):
        return [bool(task(derive_seed(seed, 0, r))) for r in range(lo, hi)]

    outcomes = np.concatenate(
        [np.asarray(b, dtype=bool) for b in _chunked(block, reps, n_jobs)]
    )
    rate = float(outcomes.mean())
    se = math.sqrt(max(rate * (1.0 - rate), 1e-12) / reps)
    return RateSummary(rate=rate, se=se, reps=int(reps), outcomes=outcomes)


def region_coverage(spec: DgpSpec, n: int, pairs, s: int, weights=None,
                    delta: float = 0.1, B: int = 500, reps: int = 1000,
                    seed: int = 0, n_jobs=1) -> CoverageSummary:
    """Empirical coverage of the covariance confidence region under ``spec``.

    The truth is the analytic Cov(X_t) restricted to ``pairs``; replicate r
    generates data on stream (seed, 0, r, 0) and calibrates on (seed, 0, r, 1).
    """
    pairs = tuple((int(i), int(j)) for i, j in pairs)
    sigma = analytic_instantaneous_cov(spec)
    truth = np.asarray([sigma[i, j] for i, j in pairs])

    def block(lo, hi):
        hits = []
        for r in range(lo, hi):
            y = generate(spec, n, derive_seed(seed, 0, r, 0))
            region = cov_confidence_region(
                y, pairs, s, weights=weights, delta=delta, B=B,
                seed=derive_seed(seed, 0, r, 1),
            )
            hits.append(region.contains(truth))
        return hits

    outcomes = np.concatenate(
        [np.asarray(b, dtype=bool) for b in _chunked(block, reps, n_jobs, chunk=16)]
    )
    cov = float(outcomes.mean())
    se = math.sqrt(max(cov * (1.0 - cov), 1e-12) / reps)
    return CoverageSummary(coverage=cov, se=se, reps=int(reps),
                           outcomes=outcomes, truth=truth)
