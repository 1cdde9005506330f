"""Command-line frontend: every pipeline as a reproducible batch command.

Design rules, enforced uniformly:

- every randomized command takes ``--seed`` (default 0); there is no
  wall-clock seeding anywhere, so identical argv means identical outputs
- JSON reports embed the fully resolved configuration plus a
  ``schema_version`` and a ``created_at`` timestamp (the one field allowed
  to differ between runs); CSV outputs carry no timestamps at all
- exit 0 on success, 1 on statistical degeneracy or numerical failure,
  2 on I/O, parse, or usage errors
- ``--config FILE`` loads a JSON object whose keys are flag names (dest
  form, e.g. ``{"B": 2000}``); explicit command-line flags still win
- coordinate flags (``--pairs``) are 1-based, matching the x1..xp CSV
  headers; the library API underneath is 0-based

``--threads`` (or the HDCLT_THREADS environment variable) sizes the worker
pool of the Monte Carlo commands; parallel replicates draw from derived
RNG streams, so thread count never changes results.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from .bootstrap import SCHEMA_VERSION
from .dgp import DgpSpec, generate
from .exceptions import DataFormatError, DegenerateDataError, NumericalError
from .gaussapprox import rate_sweep, region_coverage
from .inference import (
    changepoint_test,
    cov_confidence_region,
    mean_test,
    whitenoise_test,
)
from .kernels import KernelSpec
from .lrcov import andrews_bandwidth, lrcov_estimate
from .precision import precision_estimate
from .series import load_csv, save_csv


def _timestamp() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


def _emit_report(payload: dict, out: str | None, summary: str) -> None:
    """Write (or print) a JSON report and print the one-line summary."""
    doc = {"schema_version": SCHEMA_VERSION, "created_at": _timestamp()}
    doc.update(payload)
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    print(summary)
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _parse_int_list(text: str, flag: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise ValueError(f"{flag} expects comma-separated integers, got {text!r}")


def _parse_weights(text: str | None):
    if text is None:
        return None
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise ValueError(f"--weights expects comma-separated numbers, got {text!r}")


def _parse_pairs(text: str, p: int) -> list[tuple[int, int]]:
    """Parse 1-based '--pairs i,j;k,l' (or the 'diag' shorthand) to 0-based."""
    if text.strip().lower() == "diag":
        return [(j, j) for j in range(p)]
    pairs = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(",")
        if len(parts) != 2:
            raise ValueError(f"--pairs entries must be 'i,j', got {chunk!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"--pairs entries must be integer pairs, got {chunk!r}")
        if not (1 <= i <= p and 1 <= j <= p):
            raise ValueError(f"--pairs entry ({i},{j}) outside 1..{p}")
        pairs.append((i - 1, j - 1))
    if not pairs:
        raise ValueError("--pairs is empty")
    return pairs


def _load_specs(path) -> list[DgpSpec]:
    with open(path) as fh:
        doc = json.load(fh)
    if isinstance(doc, dict):
        doc = [doc]
    if not isinstance(doc, list) or not doc:
        raise ValueError("spec file must hold a DGP-spec object or a list of them")
    return [DgpSpec.from_dict(d) for d in doc]


def _resolve_threads(args) -> int:
    if getattr(args, "threads", None) is not None:
        return max(1, int(args.threads))
    env = os.environ.get("HDCLT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


# -- subcommand bodies -------------------------------------------------------


def _cmd_gen(args) -> int:
    specs = _load_specs(args.spec)
    if len(specs) != 1:
        raise ValueError("gen expects exactly one spec in --spec")
    spec = specs[0]
    x = generate(spec, args.n, args.seed)
    save_csv(x, args.out)
    print(f"gen: wrote {args.out} (kind={spec.kind}, n={args.n}, p={spec.p}, "
          f"seed={args.seed})")
    return 0


def _cmd_bandwidth(args) -> int:
    x = load_csv(args.input)
    b = andrews_bandwidth(x)
    print(f"bandwidth: b_n={b!r} (n={x.shape[0]}, p={x.shape[1]})")
    return 0


def _cmd_lrcov(args) -> int:
    x = load_csv(args.input)
    b = args.bandwidth if args.bandwidth is not None else andrews_bandwidth(x)
    est = lrcov_estimate(x, KernelSpec(bandwidth=float(b)))
    save_csv(est.values, args.out)
    prov = est.provenance
    print(f"lrcov: wrote {args.out} (p={est.shape[0]}, bandwidth={b!r}, "
          f"truncated={prov.get('truncated')})")
    return 0


def _cmd_test_mean(args) -> int:
    x = load_csv(args.input)
    report = mean_test(x, s=args.s, weights=_parse_weights(args.weights),
                       delta=args.delta, B=args.B, seed=args.seed,
                       bandwidth=args.bandwidth)
    _emit_report(report.to_dict(), args.out,
                 f"test-mean: statistic={report.statistic:.6g} "
                 f"critical={report.critical_value:.6g} "
                 f"p={report.p_value:.4g} reject={report.reject}")
    return 0


def _cmd_test_whitenoise(args) -> int:
    x = load_csv(args.input)
    report = whitenoise_test(x, K=args.K, s=args.s,
                             weights=_parse_weights(args.weights),
                             delta=args.delta, B=args.B, seed=args.seed,
                             bandwidth=args.bandwidth)
    _emit_report(report.to_dict(), args.out,
                 f"test-whitenoise: statistic={report.statistic:.6g} "
                 f"critical={report.critical_value:.6g} "
                 f"p={report.p_value:.4g} reject={report.reject}")
    return 0


def _cmd_changepoint(args) -> int:
    x = load_csv(args.input)
    report = changepoint_test(x, s=args.s, delta=args.delta, B=args.B,
                              seed=args.seed, bandwidth=args.bandwidth)
    _emit_report(report.to_dict(), args.out,
                 f"changepoint: statistic={report.statistic:.6g} "
                 f"critical={report.critical_value:.6g} "
                 f"p={report.p_value:.4g} reject={report.reject}")
    return 0


def _cmd_confregion(args) -> int:
    y = load_csv(args.input)
    pairs = _parse_pairs(args.pairs, y.shape[1])
    region = cov_confidence_region(y, pairs, s=args.s,
                                   weights=_parse_weights(args.weights),
                                   delta=args.delta, B=args.B, seed=args.seed,
                                   bandwidth=args.bandwidth)
    payload = region.to_dict()
    payload["pairs_one_based"] = [[i + 1, j + 1] for i, j in region.pairs]
    _emit_report(payload, args.out,
                 f"confregion: radius={region.radius:.6g} "
                 f"pairs={len(region.pairs)} s={region.s} delta={region.delta}")
    return 0


def _cmd_precision(args) -> int:
    y = load_csv(args.input)
    est = precision_estimate(y, penalties=args.penalty)
    save_csv(est.omega, args.out)
    n_conv = int(est.converged.sum())
    print(f"precision: wrote {args.out} (d={est.omega.shape[0]}, "
          f"converged={n_conv}/{est.converged.size})")
    return 0


def _cmd_rates(args) -> int:
    specs = _load_specs(args.spec)
    ns = _parse_int_list(args.n, "--n")
    table = rate_sweep(specs, ns, reps=args.reps, seed=args.seed,
                       metric=args.metric, n_jobs=_resolve_threads(args))
    table.to_csv(args.out)
    print(f"rates: wrote {args.out} ({len(table.rows)} rows, "
          f"metric={args.metric}, reps={args.reps}, seed={args.seed})")
    return 0


def _cmd_coverage(args) -> int:
    specs = _load_specs(args.spec)
    if len(specs) != 1:
        raise ValueError("coverage expects exactly one spec in --spec")
    spec = specs[0]
    pairs = _parse_pairs(args.pairs, spec.p)
    summary = region_coverage(spec, args.n, pairs, s=args.s,
                              weights=_parse_weights(args.weights),
                              delta=args.delta, B=args.B, reps=args.reps,
                              seed=args.seed, n_jobs=_resolve_threads(args))
    payload = {
        "command": "coverage",
        "coverage": summary.coverage,
        "se": summary.se,
        "reps": summary.reps,
        "truth": [float(v) for v in summary.truth],
        "config": {
            "spec": spec.to_dict(), "n": int(args.n), "pairs": args.pairs,
            "s": int(args.s), "delta": float(args.delta), "B": int(args.B),
            "seed": int(args.seed),
        },
    }
    _emit_report(payload, args.out,
                 f"coverage: {summary.coverage:.4f} +/- {summary.se:.4f} "
                 f"(target {1 - args.delta:.2f}, reps={summary.reps})")
    return 0


# -- parser ------------------------------------------------------------------

# flags that must be supplied either on the command line or via --config
_REQUIRED = {
    "gen": ("spec", "n", "out"),
    "bandwidth": ("input",),
    "lrcov": ("input", "out"),
    "test-mean": ("input",),
    "test-whitenoise": ("input",),
    "changepoint": ("input",),
    "confregion": ("input", "pairs"),
    "precision": ("input", "out"),
    "rates": ("spec", "n", "out"),
    "coverage": ("spec", "n", "pairs"),
}


def _add_common_stat_flags(sp, default_delta=0.05, default_b=1000):
    sp.add_argument("--s", type=int, default=1,
                    help="sparsity order of the max-of-sums statistic")
    sp.add_argument("--delta", type=float, default=default_delta,
                    help="nominal test level / one minus coverage")
    sp.add_argument("--B", type=int, default=default_b,
                    help="number of multiplier bootstrap draws")
    sp.add_argument("--seed", type=int, default=0, help="RNG seed")
    sp.add_argument("--bandwidth", type=float, default=None,
                    help="kernel bandwidth override (default: plug-in rule)")
    sp.add_argument("--allow-small-b", action="store_true",
                    help="permit --B below 100")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hdclt",
        description="Bootstrap inference for high-dimensional dependent time series.",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subs = {}

    def sub(name, func, **kw):
        sp = subparsers.add_parser(
            name, formatter_class=argparse.ArgumentDefaultsHelpFormatter, **kw
        )
        sp.set_defaults(func=func)
        sp.add_argument("--config", default=None,
                        help="JSON file of flag defaults (explicit flags win)")
        subs[name] = sp
        return sp

    sp = sub("gen", _cmd_gen, help="generate a synthetic series CSV from a DGP spec")
    sp.add_argument("--spec", default=None, help="DGP spec JSON file")
    sp.add_argument("--n", type=int, default=None, help="number of rows")
    sp.add_argument("--seed", type=int, default=0, help="RNG seed")
    sp.add_argument("--out", default=None, help="output CSV path")

    sp = sub("bandwidth", _cmd_bandwidth, help="print the plug-in kernel bandwidth")
    sp.add_argument("--input", default=None, help="input series CSV")

    sp = sub("lrcov", _cmd_lrcov, help="estimate the long-run covariance matrix")
    sp.add_argument("--input", default=None, help="input series CSV")
    sp.add_argument("--bandwidth", type=float, default=None,
                    help="kernel bandwidth override (default: plug-in rule)")
    sp.add_argument("--out", default=None, help="output CSV path (p x p matrix)")

    sp = sub("test-mean", _cmd_test_mean, help="bootstrap test of zero mean")
    sp.add_argument("--input", default=None, help="input series CSV")
    sp.add_argument("--weights", default=None,
                    help="comma-separated positional weights (length s)")
    _add_common_stat_flags(sp)
    sp.add_argument("--out", default=None,
                    help="JSON report path (default: print to stdout)")

    sp = sub("test-whitenoise", _cmd_test_whitenoise,
             help="bootstrap test that a series is white noise")
    sp.add_argument("--input", default=None, help="input series CSV")
    sp.add_argument("--K", type=int, default=3, help="maximum lag tested")
    sp.add_argument("--weights", default=None,
                    help="comma-separated positional weights (length s)")
    _add_common_stat_flags(sp)
    sp.add_argument("--out", default=None,
                    help="JSON report path (default: print to stdout)")

    sp = sub("changepoint", _cmd_changepoint,
             help="CUSUM bootstrap test for a mean shift")
    sp.add_argument("--input", default=None, help="input series CSV")
    _add_common_stat_flags(sp)
    sp.add_argument("--out", default=None,
                    help="JSON report path (default: print to stdout)")

    sp = sub("confregion", _cmd_confregion,
             help="confidence region for covariance entries of a mean-zero series")
    sp.add_argument("--input", default=None, help="input series CSV (mean zero)")
    sp.add_argument("--pairs", default=None,
                    help="1-based entries 'i,j;k,l' or 'diag' for all (j,j)")
    sp.add_argument("--weights", default=None,
                    help="comma-separated positional weights (length s)")
    _add_common_stat_flags(sp, default_delta=0.1)
    sp.add_argument("--out", default=None,
                    help="JSON report path (default: print to stdout)")

    sp = sub("precision", _cmd_precision,
             help="nodewise-regression precision matrix estimate")
    sp.add_argument("--input", default=None, help="input series CSV")
    sp.add_argument("--penalty", type=float, default=None,
                    help="lasso penalty for every node (default: per-column rule)")
    sp.add_argument("--out", default=None, help="output CSV path (d x d matrix)")

    sp = sub("rates", _cmd_rates,
             help="Monte Carlo approximation-error table across sample sizes")
    sp.add_argument("--spec", default=None,
                    help="JSON file: one DGP spec object or a list of them")
    sp.add_argument("--n", default=None, help="comma-separated sample sizes")
    sp.add_argument("--reps", type=int, default=1000, help="replicates per cell")
    sp.add_argument("--metric", choices=("rho", "delta"), default="rho",
                    help="rho: Gaussian-approximation gap; delta: lrcov error")
    sp.add_argument("--seed", type=int, default=0, help="RNG seed")
    sp.add_argument("--threads", type=int, default=None,
                    help="worker count (default: HDCLT_THREADS or machine cores)")
    sp.add_argument("--out", default=None, help="output CSV path")

    sp = sub("coverage", _cmd_coverage,
             help="Monte Carlo coverage of the covariance confidence region")
    sp.add_argument("--spec", default=None, help="DGP spec JSON file")
    sp.add_argument("--n", type=int, default=None, help="rows per replicate")
    sp.add_argument("--pairs", default=None,
                    help="1-based entries 'i,j;k,l' or 'diag' for all (j,j)")
    sp.add_argument("--weights", default=None,
                    help="comma-separated positional weights (length s)")
    _add_common_stat_flags(sp, default_delta=0.1, default_b=500)
    sp.add_argument("--reps", type=int, default=1000, help="MC replicates")
    sp.add_argument("--threads", type=int, default=None,
                    help="worker count (default: HDCLT_THREADS or machine cores)")
    sp.add_argument("--out", default=None,
                    help="JSON report path (default: print to stdout)")

    return parser, subs


def _parse_args(parser, subs, argv):
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        raise SystemExit(2)
    if getattr(args, "config", None):
        with open(args.config) as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            parser.error("--config file must hold a JSON object")
        sp = subs[args.command]
        valid = {a.dest for a in sp._actions}
        unknown = sorted(set(cfg) - valid)
        if unknown:
            parser.error(f"--config has unknown keys: {', '.join(unknown)}")
        sp.set_defaults(**cfg)
        args = parser.parse_args(argv)  # re-parse: explicit flags win
    for dest in _REQUIRED[args.command]:
        if getattr(args, dest, None) is None:
            parser.error(f"{args.command}: --{dest} is required "
                         f"(on the command line or via --config)")
    if hasattr(args, "delta") and not (0.0 < args.delta < 1.0):
        parser.error("--delta must lie strictly between 0 and 1")
    if hasattr(args, "B") and args.B < 100 and not getattr(args, "allow_small_b", False):
        parser.error("--B below 100 requires --allow-small-b")
    if hasattr(args, "seed") and args.seed < 0:
        parser.error("--seed must be nonnegative")
    return args


def main(argv=None) -> int:
    parser, subs = build_parser()
    try:
        args = _parse_args(parser, subs, argv)
    except SystemExit as exc:  # argparse printed usage/help already
        code = exc.code
        return code if isinstance(code, int) else 2
    except (OSError, json.JSONDecodeError) as exc:  # unreadable --config
        print(f"hdclt: error: {exc}", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (DegenerateDataError, NumericalError) as exc:
        print(f"hdclt: error: {exc}", file=sys.stderr)
        return 1
    except (DataFormatError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"hdclt: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
