"""Command-line surface: analyze a series file, run a study, tabulate limit quantiles.

Exit codes: 0 success, 1 usage or config error, 2 data error, 3 numerical
guard tripped (argmax grid too small).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

from . import __version__
from ._backend import backend_name
from .bootstrap import SCHEMES, BootstrapConfig, bootstrap_ci, bootstrap_distribution, bootstrap_quantiles
from .cusum import fit_amoc
from .intervals import ConfidenceInterval
from .limitdist import (
    GridTooSmallError,
    LimitLawConfig,
    empirical_quantile,
    simulate_argmax_samples,
    simulate_argmax_samples_scaled,
)
from .lrv import bartlett_lrv, default_window
from .model import SeriesFormatError, read_series
from .rngstreams import derive_seed
from .study import StudyConfigError, load_study_config, run_study, write_study_csvs

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_GUARD = 3

_TAG_ANALYZE_BOOT = 1
_TAG_ANALYZE_LIMIT = 2

_DEFAULT_PROBS = (0.01, 0.025, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.975, 0.99)


class UsageError(ValueError):
    """Bad flag values or an invalid configuration."""


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; this CLI reserves 2 for data errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class AnalyzeReport:
    """Everything one analyze run used and produced, parameters echoed in full."""

    series_path: str
    n: int
    gamma: float
    block_lengths: tuple[int, ...]
    resamples: int
    alphas: tuple[float, ...]
    window: int
    seed: int
    scheme: str
    limit_settings: dict
    kernel_backend: str
    m_hat: int
    mu1_hat: float
    mu2_hat: float
    d_hat: float
    theta_hat: float
    tau2: float
    tau2_floored: bool
    bootstrap_results: tuple[dict, ...]
    asymptotic_results: dict | None
    warnings: tuple[str, ...]

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def to_text(self) -> str:
        g = "{:.6g}".format
        lines = [
            f"series: {self.series_path} (n={self.n})",
            f"kernel backend: {self.kernel_backend}",
            f"gamma: {g(self.gamma)}   seed: {self.seed}",
            f"fit: m_hat={self.m_hat}  theta_hat={g(self.theta_hat)}  "
            f"mu1_hat={g(self.mu1_hat)}  mu2_hat={g(self.mu2_hat)}  d_hat={g(self.d_hat)}",
            f"long-run variance: tau2={g(self.tau2)}  (Bartlett window {self.window}"
            + (", floored)" if self.tau2_floored else ")"),
            f"bootstrap: scheme={self.scheme}  B={self.resamples}",
        ]
        for block in self.bootstrap_results:
            lines.append(f"  K={block['block_length']} (seed {block['seed']}):")
            for iv in block["intervals"]:
                lines.append(
                    f"    alpha={g(iv['alpha'])}  CI=[{g(iv['lower'])}, {g(iv['upper'])}]"
                    f"  clipped=[{g(iv['lower_clipped'])}, {g(iv['upper_clipped'])}]"
                )
        if self.asymptotic_results is None:
            lines.append("asymptotic: undefined (fitted shift is zero)")
        else:
            a = self.asymptotic_results
            lines.append(
                f"asymptotic: sampler={a['sampler']}  T={g(a['half_width_T'])}  "
                f"h={g(a['step_h'])}  M={a['replicates_M']}  (seed {a['seed']})  "
                f"boundary_hits={a['boundary_hit_fraction']:.4f}"
            )
            for iv in a["intervals"]:
                lines.append(
                    f"    alpha={g(iv['alpha'])}  CI=[{g(iv['lower'])}, {g(iv['upper'])}]"
                    f"  clipped=[{g(iv['lower_clipped'])}, {g(iv['upper_clipped'])}]"
                )
        if self.warnings:
            lines.append("warnings:")
            lines.extend(f"  - {w}" for w in self.warnings)
        else:
            lines.append("warnings: none")
        return "\n".join(lines) + "\n"


def _interval_entry(alpha: float, ci: ConfidenceInterval, n: int, q_lower: float, q_upper: float) -> dict:
    lo_c, hi_c = ci.clipped(n)
    return {
        "alpha": alpha,
        "lower": ci.lower,
        "upper": ci.upper,
        "lower_clipped": lo_c,
        "upper_clipped": hi_c,
        "q_lower": q_lower,
        "q_upper": q_upper,
    }


def _check(condition: bool, message: str) -> None:
    if not condition:
        raise UsageError(message)


def cmd_analyze(args) -> int:
    series = read_series(args.series)
    n = series.n

    _check(0.0 <= args.gamma <= 0.5, f"--gamma must lie in [0, 1/2], got {args.gamma}")
    _check(args.seed >= 0, f"--seed must be nonnegative, got {args.seed}")
    _check(args.resamples >= 2, f"--resamples must be at least 2, got {args.resamples}")
    for k in args.block_length:
        _check(1 <= k <= n, f"--block-length {k} outside 1..n={n}")
    alphas = tuple(args.alpha)
    for a in alphas:
        _check(0.0 < a < 1.0, f"--alpha {a} outside (0, 1)")
    window = args.window if args.window is not None else default_window(n)
    _check(1 <= window <= n - 2, f"Bartlett window {window} outside 1..{n - 2}")

    warnings = []
    fit = fit_amoc(series, args.gamma)
    est = bartlett_lrv(series, fit.m_hat, window)
    if est.floored:
        warnings.append("long-run variance estimate was floored to keep it positive")

    scale = abs(fit.d_hat) / max(abs(fit.mu1_hat), abs(fit.mu2_hat), 1.0)
    if fit.d_hat != 0.0 and scale < 1e-8:
        warnings.append("fitted shift is nearly zero; asymptotic interval is unstable")

    bootstrap_results = []
    for k_idx, k in enumerate(args.block_length):
        seed = derive_seed(args.seed, _TAG_ANALYZE_BOOT, k_idx)
        dist = bootstrap_distribution(
            fit,
            BootstrapConfig(block_length=k, resamples=args.resamples, scheme=args.scheme, seed=seed),
        )
        entries = []
        for a in alphas:
            q_lo, q_hi = bootstrap_quantiles(dist.samples, a)
            entries.append(_interval_entry(a, bootstrap_ci(dist, a), n, q_lo, q_hi))
        bootstrap_results.append(
            {"block_length": k, "seed": seed, "intervals": entries}
        )

    limit_seed = derive_seed(args.seed, _TAG_ANALYZE_LIMIT)
    limit_settings = {
        "sampler": args.limit_sampler,
        "half_width_T": args.limit_half_width,
        "step_h": args.limit_step,
        "replicates_M": args.limit_replicates,
        "seed": limit_seed,
    }
    asymptotic_results = None
    if fit.d_hat == 0.0:
        warnings.append("fitted shift is zero; asymptotic intervals are undefined")
    else:
        try:
            limit_config = LimitLawConfig(
                theta=fit.m_hat / n,
                gamma=args.gamma,
                half_width_T=args.limit_half_width,
                step_h=args.limit_step,
                replicates_M=args.limit_replicates,
                seed=limit_seed,
            )
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        sampler = simulate_argmax_samples if args.limit_sampler == "literal" else simulate_argmax_samples_scaled
        samples = sampler(limit_config)
        if samples.boundary_hit_fraction > 0:
            warnings.append(
                f"{samples.boundary_hit_fraction:.4f} of limit-law draws hit the grid edge zone"
            )
        c = est.tau2 / (fit.d_hat * fit.d_hat)
        entries = []
        for a in alphas:
            q_lo = empirical_quantile(samples.samples, a / 2.0)
            q_hi = empirical_quantile(samples.samples, 1.0 - a / 2.0)
            ci = ConfidenceInterval(
                lower=fit.m_hat - c * q_hi,
                upper=fit.m_hat - c * q_lo,
                level=1.0 - a,
                method="asymptotic",
            )
            entries.append(_interval_entry(a, ci, n, q_lo, q_hi))
        asymptotic_results = dict(limit_settings)
        asymptotic_results["boundary_hit_fraction"] = samples.boundary_hit_fraction
        asymptotic_results["intervals"] = entries

    report = AnalyzeReport(
        series_path=str(args.series),
        n=n,
        gamma=args.gamma,
        block_lengths=tuple(args.block_length),
        resamples=args.resamples,
        alphas=alphas,
        window=window,
        seed=args.seed,
        scheme=args.scheme,
        limit_settings=limit_settings,
        kernel_backend=backend_name(),
        m_hat=fit.m_hat,
        mu1_hat=fit.mu1_hat,
        mu2_hat=fit.mu2_hat,
        d_hat=fit.d_hat,
        theta_hat=fit.m_hat / n,
        tau2=est.tau2,
        tau2_floored=est.floored,
        bootstrap_results=tuple(bootstrap_results),
        asymptotic_results=asymptotic_results,
        warnings=tuple(warnings),
    )
    sys.stdout.write(report.to_text())
    if args.json is not None:
        Path(args.json).write_text(report.to_json() + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_study(args) -> int:
    _check(args.threads >= 1, f"--threads must be at least 1, got {args.threads}")
    config = load_study_config(args.config)
    result = run_study(config, threads=args.threads)
    paths = write_study_csvs(result, args.out_dir)

    undefined_cells = []
    total_undefined = 0
    for key, count in result.cole.undefined_counts.items():
        if key.method == "asymptotic":
            total_undefined += count
            if count:
                undefined_cells.append(
                    {"d": key.d, "rho": key.rho, "gamma": key.gamma,
                     "K": key.block_length, "count": count}
                )
    undefined_cells.sort(key=lambda c: (c["d"], c["rho"], c["gamma"], c["K"]))

    manifest = {
        "config_file": str(args.config),
        "config_sha256": hashlib.sha256(Path(args.config).read_bytes()).hexdigest(),
        "master_seed": config.master_seed,
        "resolved_config": asdict(config),
        "package_version": __version__,
        "kernel_backend": backend_name(),
        "undefined_asymptotic": {"total": total_undefined, "cells": undefined_cells},
        "outputs": sorted(p.name for p in paths.values()),
    }
    out = Path(args.out_dir)
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    cells = len(config.cells)
    sys.stdout.write(
        f"wrote {', '.join(sorted(p.name for p in paths.values()))} and manifest.json to {out} "
        f"({cells} cells x {config.replications_R} replications)\n"
    )
    return EXIT_OK


def cmd_limit_quantiles(args) -> int:
    _check(args.seed >= 0, f"--seed must be nonnegative, got {args.seed}")
    probs = tuple(args.p)
    for p in probs:
        _check(0.0 < p < 1.0, f"--p {p} outside (0, 1)")
    try:
        config = LimitLawConfig(
            theta=args.theta,
            gamma=args.gamma,
            half_width_T=args.half_width,
            step_h=args.step,
            replicates_M=args.replicates,
            seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    samples = simulate_argmax_samples(config)
    rows = ["p,q"]
    rows += [f"{float(p)!r},{empirical_quantile(samples.samples, p)!r}" for p in probs]
    text = "\n".join(rows) + "\n"
    if args.output is not None:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="amocboot", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "analyze",
        help="estimate the change point of a series file and report confidence intervals",
    )
    p.add_argument("series", help="text file with one observation per line")
    p.add_argument("--gamma", type=float, default=0.5, help="CUSUM weight exponent in [0, 1/2] (default: 0.5)")
    p.add_argument(
        "--block-length", "-K", type=int, nargs="+", required=True, metavar="K",
        help="bootstrap block length(s); one bootstrap pass per value",
    )
    p.add_argument("--resamples", "-B", type=int, default=10_000, help="bootstrap resamples (default: 10000)")
    p.add_argument(
        "--alpha", type=float, nargs="+", default=[0.05], metavar="A",
        help="levels for (1-A) confidence intervals (default: 0.05)",
    )
    p.add_argument(
        "--window", type=int, default=None, metavar="L",
        help="Bartlett window override (default: max(1, floor(0.1 n)))",
    )
    p.add_argument("--seed", type=int, default=0, help="master seed (default: 0)")
    p.add_argument("--scheme", choices=SCHEMES, default="circular_overlapping", help="block scheme")
    p.add_argument("--limit-half-width", type=float, default=200.0, metavar="T", help="limit-law grid half-width")
    p.add_argument("--limit-step", type=float, default=0.05, metavar="H", help="limit-law grid step")
    p.add_argument("--limit-replicates", type=int, default=200_000, metavar="M", help="limit-law draws")
    p.add_argument(
        "--limit-sampler", choices=("auto", "literal"), default="auto",
        help="auto rescales shallow drifts onto the grid exactly; literal uses the raw grid",
    )
    p.add_argument("--json", default=None, metavar="PATH", help="also write the report as JSON")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("study", help="run a simulation study from a YAML config")
    p.add_argument("config", help="YAML study configuration file")
    p.add_argument("out_dir", help="directory for cole.csv, coil.csv, replications.csv, manifest.json")
    p.add_argument("--threads", type=int, default=1, help="worker threads (default: 1); output does not depend on it")
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("limit-quantiles", help="tabulate quantiles of the argmax limit law")
    p.add_argument("--theta", type=float, required=True, help="relative change location in (0, 1)")
    p.add_argument("--gamma", type=float, required=True, help="CUSUM weight exponent in [0, 1/2]")
    p.add_argument("--replicates", type=int, default=200_000, metavar="M", help="draws (default: 200000)")
    p.add_argument("--half-width", type=float, default=200.0, metavar="T", help="grid half-width (default: 200)")
    p.add_argument("--step", type=float, default=0.05, metavar="H", help="grid step (default: 0.05)")
    p.add_argument("--seed", type=int, default=0, help="rng seed (default: 0)")
    p.add_argument(
        "--p", type=float, nargs="+", default=list(_DEFAULT_PROBS), metavar="P",
        help="probabilities to tabulate",
    )
    p.add_argument("--output", default=None, metavar="PATH", help="write CSV here instead of stdout")
    p.set_defaults(func=cmd_limit_quantiles)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, StudyConfigError) as exc:
        sys.stderr.write(f"amocboot: error: {exc}\n")
        return EXIT_USAGE
    except (SeriesFormatError, OSError) as exc:
        sys.stderr.write(f"amocboot: data error: {exc}\n")
        return EXIT_DATA
    except GridTooSmallError as exc:
        sys.stderr.write(f"amocboot: numerical guard: {exc}\n")
        return EXIT_GUARD


if __name__ == "__main__":
    sys.exit(main())
