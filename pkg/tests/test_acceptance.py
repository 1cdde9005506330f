"""Acceptance gate: twelve primary criteria, one printed verdict line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines; the whole file takes a few minutes, dominated by criteria 6, 9, 11.
"""

import itertools
import json
import math

import mpmath
import numpy as np
from scipy import stats

from hdclt.bootstrap import sample_ghat
from hdclt.cli import main
from hdclt.dgp import DgpSpec, estimate_theta
from hdclt.gaussapprox import delta_nr, empirical_rho, region_coverage
from hdclt.inference import changepoint_test, mean_test, tns_statistic
from hdclt.kernels import qs_kernel
from hdclt.lrcov import bandwidth_from_ar, lrcov_estimate, theta_matrix
from hdclt.kernels import KernelSpec
from hdclt.lrcov import andrews_bandwidth
from hdclt.rng import derive_rng, derive_seed
from hdclt.series import save_csv


def _report(num: int, ok: bool, detail: str) -> None:
    print(f"[criterion {num:02d}] {'PASS' if ok else 'FAIL'} — {detail}")
    assert ok, f"criterion {num}: {detail}"


def _qs_oracle(x: float) -> float:
    with mpmath.workdps(50):
        if x == 0:
            return 1.0
        z = mpmath.mpf(6) * mpmath.pi * mpmath.mpf(repr(x)) / 5
        val = (25 / (12 * mpmath.pi**2 * mpmath.mpf(repr(x)) ** 2)) * (
            mpmath.sin(z) / z - mpmath.cos(z)
        )
        return float(val)


def test_criterion_01_kernel_exactness():
    grid = [-10.0, -7.0, -4.5, -3.0, -1.5, 1.5, 3.0, 4.5, 7.0, 10.0]
    worst = max(abs(qs_kernel(x) - _qs_oracle(x)) for x in grid)
    xs = np.geomspace(1e-3, 10.0, 60)
    even = np.array_equal(qs_kernel(xs), qs_kernel(-xs))
    ok = worst <= 1e-12 and qs_kernel(0.0) == 1.0 and even
    _report(1, ok, f"max grid error {worst:.2e}, K(0)={qs_kernel(0.0)}, even={even}")


def test_criterion_02_theta_psd():
    worst = -np.inf
    for n in (50, 200):
        for b in (1.3221, 5.0, 10.0):
            eig = np.linalg.eigvalsh(theta_matrix(n, b))
            worst = max(worst, -eig[0] / eig[-1])
    ok = worst <= 1e-8
    _report(2, ok, f"worst -min_eig/max_eig ratio {worst:.2e} over 6 grid cells")


def test_criterion_03_bootstrap_conditional_law():
    n, p, B = 100, 5, 20000
    x = derive_rng(3).standard_normal((n, p))
    b = andrews_bandwidth(x)
    xi = lrcov_estimate(x, KernelSpec(bandwidth=b)).values
    draws = sample_ghat(x, b, B, 0).draws
    emp = draws.T @ draws / B
    d = np.diag(xi)
    se = np.sqrt((np.outer(d, d) + xi**2) / B)
    cov_ratio = float(np.max(np.abs(emp - xi) / se))
    crit = 1.628 / math.sqrt(B)  # 1% Kolmogorov-Smirnov critical value
    ks = max(
        stats.kstest(draws[:, j], "norm", args=(0.0, math.sqrt(d[j]))).statistic
        for j in range(p)
    )
    ok = cov_ratio <= 4.0 and ks < crit
    _report(3, ok, f"cov gap {cov_ratio:.2f} MC-se (limit 4), "
                   f"worst KS {ks:.5f} vs 1% crit {crit:.5f}")


def test_criterion_04_bandwidth_golden():
    b = bandwidth_from_ar(np.array([0.5]), np.array([1.0]), 100)
    ok = abs(b - 5.782) <= 0.001
    _report(4, ok, f"b_n(rho=.5, sigma2=1, n=100) = {b:.6f} vs 5.782 +/- 0.001")


def test_criterion_05_tns_oracle_equivalence():
    # instances live on a dyadic lattice (halves and eighths) so that both
    # maximization paths produce exactly representable partial sums and the
    # comparison can demand literal equality
    rng = derive_rng(55)
    checked = 0
    for _ in range(200):
        p = int(rng.integers(2, 13))
        s = int(rng.integers(1, min(4, p) + 1))
        v = rng.integers(-9, 10, size=p) / 2.0
        a = rng.integers(1, 9, size=s) / 8.0
        for weights in (None, a):
            brute = -np.inf
            for combo in itertools.combinations(range(p), s):
                total = 0.0
                for k, j in enumerate(combo):
                    total += (1.0 if weights is None else weights[k]) * v[j] ** 2
                brute = max(brute, total)
            if tns_statistic(v, s, weights) != brute:
                _report(5, False, f"DP != enumeration at p={p}, s={s}")
            checked += 1
    _report(5, True, f"DP == enumeration exactly on {checked} weighted maximizations")


def test_criterion_06_mean_test_size():
    sizes = {}
    for s in (1, 5):
        rejections = 0
        for r in range(1000):
            x = derive_rng(derive_seed(6, s, r)).standard_normal((200, 40))
            rep = mean_test(x, s=s, delta=0.05, B=500,
                            seed=derive_seed(6, s, r, 1))
            rejections += rep.reject
        sizes[s] = rejections / 1000.0
    ok = all(0.03 <= v <= 0.08 for v in sizes.values())
    _report(6, ok, f"empirical size s=1: {sizes[1]:.4f}, s=5: {sizes[5]:.4f} "
                   f"(band [0.03, 0.08])")


def test_criterion_07_changepoint_power_and_size():
    shift = np.zeros(20)
    shift[0] = 1.0  # sup-norm 1 mean shift
    hits = 0
    for r in range(500):
        y = derive_rng(derive_seed(7, 1, r)).standard_normal((200, 20))
        y[100:] += shift
        rep = changepoint_test(y, s=3, delta=0.05, B=500,
                               seed=derive_seed(7, 1, r, 1))
        hits += rep.reject
    power = hits / 500.0
    false_alarms = 0
    for r in range(1000):
        y = derive_rng(derive_seed(7, 0, r)).standard_normal((200, 20))
        rep = changepoint_test(y, s=3, delta=0.05, B=500,
                               seed=derive_seed(7, 0, r, 1))
        false_alarms += rep.reject
    size = false_alarms / 1000.0
    ok = power >= 0.9 and 0.03 <= size <= 0.08
    _report(7, ok, f"power {power:.3f} (need >= 0.9), size {size:.4f} "
                   f"(band [0.03, 0.08])")


def test_criterion_08_delta_decay():
    spec = DgpSpec.ma_q((1.0, 0.5), p=10)
    med_small = delta_nr(spec, 250, reps=50, seed=8).median
    med_large = delta_nr(spec, 2000, reps=50, seed=8).median
    ok = med_large < 0.5 * med_small
    _report(8, ok, f"median sup-error {med_small:.4f} @ n=250 -> "
                   f"{med_large:.4f} @ n=2000 (ratio {med_large/med_small:.3f})")


def test_criterion_09_rho_decay_and_null():
    # The true sup-discrepancy for 2-dependent uniform-innovation averages is
    # ~4e-3 at n=100 and ~1e-3 at n=800 (measured against analytic box masses
    # at 2e5 replicates), while the sup estimator's own noise floor at 5000
    # replicates is ~1.8e-2 — the decay is real but invisible at that
    # resolution, so the two-point comparison runs at 1.2e6 replicates.
    # Gaussian innovations would make the scaled sums exactly normal (no
    # decay to observe); uniform innovations carry the kurtosis-driven error.
    spec = DgpSpec.ma_q((1.0, 0.5, 0.25), p=20, innovation="uniform")
    big = 1_200_000
    rho_100 = empirical_rho(spec, 100, reps=big, seed=0).value
    rho_800 = empirical_rho(spec, 800, reps=big, seed=100).value
    null_spec = DgpSpec.ma_q((1.0,), p=20)
    null = empirical_rho(null_spec, 100, reps=5000, seed=10)
    ok = rho_800 < rho_100 and null.value <= 3.0 * null.se
    _report(9, ok, f"rho(100)={rho_100:.5f} > rho(800)={rho_800:.5f} "
                   f"at R={big}; null {null.value:.4f} <= 3se={3*null.se:.4f}")


def test_criterion_10_physical_dependence_oracle():
    spec = DgpSpec.causal_linear(2.0, p=4)
    worst = 0.0
    for m in (0, 1, 3):
        est = estimate_theta(spec, m, q=2.0, reps=100000, seed=10 + m)
        truth = math.sqrt(2.0) * (m + 1) ** -2.0
        worst = max(worst, float(np.max(np.abs(est.values - truth)) / truth))
    ok = worst <= 0.05
    _report(10, ok, f"max relative error {worst:.4f} over m in (0,1,3) "
                    f"(limit 0.05)")


def test_criterion_11_region_coverage():
    spec = DgpSpec.ma_q((1.0,), p=10)
    pairs = tuple((j, j) for j in range(10))
    out = region_coverage(spec, n=400, pairs=pairs, s=2, delta=0.1, B=500,
                          reps=1000, seed=0)
    ok = 0.87 <= out.coverage <= 0.93
    _report(11, ok, f"empirical coverage {out.coverage:.4f} "
                    f"(target 0.90, band [0.87, 0.93])")


def test_criterion_12_cli_determinism(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({
        "schema_version": 1, "kind": "ma_q",
        "coefficients": [1.0, 0.5], "p": 3, "innovation": "gaussian",
    }))
    data = tmp_path / "data.csv"
    save_csv(derive_rng(12).standard_normal((100, 3)), data)

    runs = {
        "gen": ["gen", "--spec", str(spec), "--n", "40", "--seed", "4"],
        "lrcov": ["lrcov", "--input", str(data)],
        "precision": ["precision", "--input", str(data)],
        "rates": ["rates", "--spec", str(spec), "--n", "16,24",
                  "--reps", "40", "--threads", "1"],
        "test-mean": ["test-mean", "--input", str(data), "--B", "150"],
        "confregion": ["confregion", "--input", str(data),
                       "--pairs", "1,1;2,2", "--B", "150"],
        "coverage": ["coverage", "--spec", str(spec), "--n", "30",
                     "--pairs", "1,1", "--reps", "10", "--B", "120"],
    }
    mismatched = []
    for name, argv in runs.items():
        suffix = "csv" if name in ("gen", "lrcov", "precision", "rates") else "json"
        a = tmp_path / f"{name}_a.{suffix}"
        b = tmp_path / f"{name}_b.{suffix}"
        assert main(argv + ["--out", str(a)]) == 0
        assert main(argv + ["--out", str(b)]) == 0
        if suffix == "csv":
            same = a.read_bytes() == b.read_bytes()
        else:  # JSON reports carry one wall-clock field
            keep = lambda p: [ln for ln in p.read_text().splitlines()
                              if '"created_at"' not in ln]
            same = keep(a) == keep(b)
        if not same:
            mismatched.append(name)
    capsys.readouterr()
    _report(12, not mismatched,
            f"byte-identical reruns for {len(runs)} commands"
            + (f"; mismatches: {mismatched}" if mismatched else ""))
