"""``contam`` command line: robustness check, KL sweep, predictive bands, mixture dump."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig
from .conjugate import build_mixture_posterior, predictive_quantiles
from .divergence import kl_sweep
from .robustness import RobustnessQuery, Verdict, check_robustness, moment_threshold

EXIT_CODES = {Verdict.ROBUST: 0, Verdict.NON_ROBUST: 2, Verdict.INCONCLUSIVE: 3}
DEFAULT_OMEGA = 100.0


def fmt(x) -> str:
    """Shortest round-trip float text."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def write_atomic(path, text):
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent if str(path.parent) else ".",
                               prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cmd_check(cfg: ExperimentConfig):
    q = RobustnessQuery(cfg.sigma_prior(), cfg.error_density(), len(cfg.outliers["indices"]))
    v = check_robustness(q)
    report = {"verdict": v.verdict.value, "condition": v.condition, "nu": v.nu,
              "prior_bound": v.prior_bound, "n_outliers": q.n_outliers,
              "alpha": q.error.tail.alpha, "moment_threshold": moment_threshold(q.prior)}
    return v, report


def cmd_kl_sweep(cfg: ExperimentConfig) -> str:
    rows = kl_sweep(cfg.data(), cfg.nig_prior(), cfg.s, cfg.error_density(), cfg.omegas,
                    cfg.mc_samples, cfg.seed)
    lines = ["omega,kl_estimate,kl_se,log10_kl"]
    for row in rows:
        if row.estimate is None:
            lines.append(f"{fmt(row.omega)},nan,nan,nan")
            continue
        est = row.estimate
        log10 = math.log10(est.value) if est.value > 0 else math.nan
        lines.append(f"{fmt(row.omega)},{fmt(est.value)},{fmt(est.std_error)},{fmt(log10)}")
    return "\n".join(lines) + "\n"


def _full_mixture(cfg, omega):
    return build_mixture_posterior(cfg.data(), omega, cfg.nig_prior(), cfg.s, cfg.error_density())


def cmd_predict(cfg: ExperimentConfig, omega=DEFAULT_OMEGA) -> str:
    if not cfg.xt_grid:
        raise ConfigError("xt_grid: must be nonempty for predict")
    mix = _full_mixture(cfg, omega)
    lines = ["xt2,quantity,level,value"]
    for xt in cfg.xt_grid:
        q = predictive_quantiles(mix, xt, levels=cfg.quantile_levels,
                                 count=cfg.mc_samples, seed=cfg.seed)
        for name, values in (("linpred", q.linpred), ("predictive", q.predictive)):
            for level, value in zip(q.levels, values):
                lines.append(f"{fmt(xt[-1])},{name},{fmt(level)},{fmt(value)}")
    return "\n".join(lines) + "\n"


def cmd_posterior(cfg: ExperimentConfig, omega=DEFAULT_OMEGA) -> str:
    mix = _full_mixture(cfg, omega)
    p = mix.p
    header = ["subset_bitmask", "log_weight", "shape", "scale"] + [f"mu_{k + 1}" for k in range(p)]
    order = sorted(range(len(mix)), key=lambda k: (-mix.log_weights[k], int(mix.subsets[k])))
    lines = [",".join(header)]
    for k in order:
        c = mix.params[k]
        cells = [str(int(mix.subsets[k])), fmt(mix.log_weights[k]), fmt(c.shape), fmt(c.scale)]
        lines.append(",".join(cells + [fmt(m) for m in c.mu]))
    return "\n".join(lines) + "\n"


def build_parser():
    parser = argparse.ArgumentParser(prog="contam", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("check", "kl-sweep", "predict", "posterior"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON experiment configuration")
        sp.add_argument("--out", help="output file (CSV; JSON report for check)")
        sp.add_argument("--seed", type=int, help="override the configured seed")
        if name in ("predict", "posterior"):
            sp.add_argument("--omega", type=float, default=DEFAULT_OMEGA,
                            help=f"outlier magnitude (default {DEFAULT_OMEGA:g})")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = ExperimentConfig.load(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed: must be non-negative")
            cfg = cfg.with_seed(args.seed)
    except (OSError, ConfigError) as exc:
        print(f"contam: {args.config}: {exc}", file=sys.stderr)
        return 1

    try:
        if args.command == "check":
            verdict, report = cmd_check(cfg)
            print(verdict)
            print(json.dumps(report, ensure_ascii=False))
            if args.out:
                try:
                    write_atomic(args.out, json.dumps(report, indent=2, ensure_ascii=False) + "\n")
                except OSError as exc:
                    print(f"contam: cannot write {args.out}: {exc}", file=sys.stderr)
                    return 1
            return EXIT_CODES[verdict.verdict]
        if args.command == "kl-sweep":
            text = cmd_kl_sweep(cfg)
        elif args.command == "predict":
            text = cmd_predict(cfg, args.omega)
        else:
            text = cmd_posterior(cfg, args.omega)
    except (ConfigError, ValueError) as exc:
        print(f"contam: {exc}", file=sys.stderr)
        return 1

    if args.out:
        try:
            write_atomic(args.out, text)
        except OSError as exc:
            print(f"contam: cannot write {args.out}: {exc}", file=sys.stderr)
            return 1
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
