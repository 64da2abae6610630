"""Command-line surface: risk curves, minimax constants, domination checks,
UMVUE bias checks and conditional-risk minimizer reports.

Tabular output is RFC-4180-style CSV with columns
target,estimator,n,mu,mode,risk,se. Plots are SVG files rendered with
matplotlib, stripped of timestamps so identical runs are byte-identical.
Every command that writes a file also writes a <file>.manifest of plain
key=value lines; `selexp replay <manifest>` re-runs the command and
reproduces the outputs byte-exactly.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
import time
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "selexp"

import matplotlib.pyplot as plt  # noqa: E402

from . import __version__  # noqa: E402
from .estimators import EstimatorSpec, SpecParseError, parse_spec  # noqa: E402
from .mc import McConfig, compare_domination, estimate_risk, validate_psi  # noqa: E402
from .model import Target  # noqa: E402
from .risk import (  # noqa: E402
    UNBOUNDED,
    admissible_interval,
    minimax_c,
    minimax_root_expression,
    psi_envelopes,
    psi_mu,
    risk_value,
    sup_risk_linear,
)

CSV_HEADER = ["target", "estimator", "n", "mu", "mode", "risk", "se"]

_NONLINEAR = ("umvue", "improved")


class CliError(Exception):
    """Usage error; printed to stderr with exit status 2."""


def _load_config_file(path: str) -> Dict[str, str]:
    out: Dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise CliError(f"bad config line (expected key=value): {raw!r}")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _mu_grid(args) -> List[float]:
    lo, hi, step = args.mu_min, args.mu_max, args.mu_step
    if step <= 0 or hi < lo:
        raise CliError("require mu-step > 0 and mu-max >= mu-min")
    count = int(round((hi - lo) / step)) + 1
    return [lo + i * step for i in range(count)]


def _parse_estimator(target: str, token: str) -> EstimatorSpec:
    try:
        return parse_spec(f"{target}:{token.strip()}")
    except SpecParseError as exc:
        raise CliError(str(exc)) from exc


def _write_manifest(out_path: Path, command: str, args, keys: Sequence[str]) -> Path:
    manifest = out_path.with_name(out_path.name + ".manifest")
    lines = [
        f"command={command}",
        f"version={__version__}",
        f"timestamp={int(time.time())}",
    ]
    for key in keys:
        value = getattr(args, key)
        if value is not None:
            lines.append(f"arg.{key}={value}")
    manifest.write_text("\n".join(lines) + "\n")
    return manifest


def _write_csv(path: Path, rows: List[List]) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        writer.writerows(rows)


def _plot_curves(svg_path: Path, curves: Dict[str, List], title: str) -> None:
    fig, ax = plt.subplots(figsize=(8, 6))
    for label, (mus, risks) in curves.items():
        ax.plot(mus, risks, marker="", label=label)
    ax.set_xlabel("normalized gap")
    ax.set_ylabel("scaled mean squared error")
    ax.set_title(title)
    ax.legend()
    fig.savefig(svg_path, format="svg", metadata={"Date": None})
    plt.close(fig)


# --- subcommands ------------------------------------------------------------


def cmd_risk_curve(args) -> int:
    target = Target(args.target)
    specs = [_parse_estimator(args.target, tok) for tok in args.estimators.split(",")]
    if args.mode in ("analytic", "both"):
        for spec in specs:
            bad = spec.family in _NONLINEAR
            if bad:
                raise CliError(
                    f"analytic mode cannot evaluate '{spec.canonical()}': no "
                    "closed-form risk exists for non-linear estimators; use "
                    "--mode mc"
                )
    grid = _mu_grid(args)
    rows: List[List] = []
    curves: Dict[str, List] = {}
    for spec in specs:
        label = spec.canonical()
        risks: List[float] = []
        if args.mode in ("analytic", "both"):
            for mu in grid:
                from .estimators import resolve_coefficient

                value = risk_value(resolve_coefficient(spec, args.n), mu, args.n, target)
                rows.append([args.target, label, args.n, f"{mu:.6g}", "analytic", f"{value:.12g}", ""])
                risks.append(value)
        if args.mode in ("mc", "both"):
            config = McConfig(
                n=args.n, seed=args.seed, replicates=args.reps, mu_grid=tuple(grid)
            )
            result = estimate_risk(spec, config)
            risks = []
            for pt in result.points:
                rows.append(
                    [args.target, label, args.n, f"{pt.mu:.6g}", "mc", f"{pt.value:.12g}", f"{pt.se:.6g}"]
                )
                risks.append(pt.value)
        curves[label] = (grid, risks)

    out = Path(args.out)
    _write_csv(out, rows)
    _write_manifest(
        out,
        "risk-curve",
        args,
        ["target", "estimators", "n", "mu_min", "mu_max", "mu_step", "mode", "reps", "seed", "out", "svg"],
    )
    if args.svg:
        _plot_curves(
            Path(args.svg),
            curves,
            f"risk of {args.target}-target estimators, n={args.n} ({args.mode})",
        )
    return 0


def cmd_minimax(args) -> int:
    target = Target(args.target)
    interval = admissible_interval(args.n, target)
    c = minimax_c(args.n, target)
    sup = sup_risk_linear(c, args.n, target)
    lines = [
        f"target={args.target}",
        f"n={args.n}",
        f"minimax_c={c:.12g}",
        f"admissible_lo={interval.lo:.12g}",
        f"admissible_hi={interval.hi:.12g}",
        f"sup_risk={sup:.12g}",
    ]
    if target is Target.BEST:
        lines.append(f"root_residual={minimax_root_expression(c, args.n):.3g}")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        out = Path(args.out)
        out.write_text(text)
        _write_manifest(out, "minimax", args, ["target", "n", "out"])
    return 0


def cmd_dominate(args) -> int:
    base = _parse_estimator(args.target, args.base)
    challenger = _parse_estimator(args.target, args.challenger)
    config = McConfig(
        n=args.n, seed=args.seed, replicates=args.reps, mu_grid=tuple(_mu_grid(args))
    )
    report = compare_domination(base, challenger, config)
    rows = [
        [args.target, f"{challenger.canonical()} vs {base.canonical()}", args.n,
         f"{p.mu:.6g}", "mc-paired-diff", f"{p.mean_diff:.12g}", f"{p.se:.6g}"]
        for p in report.points
    ]
    if args.out:
        out = Path(args.out)
        _write_csv(out, rows)
        _write_manifest(
            out,
            "dominate",
            args,
            ["target", "base", "challenger", "n", "mu_min", "mu_max", "mu_step", "reps", "seed", "out"],
        )
    verdicts = [p.verdict for p in report.points]
    if any(v == "base_better" for v in verdicts):
        overall = "base_better_somewhere"
        code = 3
    elif report.dominates:
        overall = "dominates"
        code = 0
    else:
        overall = "inconclusive"
        code = 2
    sys.stdout.write(f"verdict={overall}\n")
    return code


def cmd_umvue_check(args) -> int:
    target = Target(args.target)
    spec = _parse_estimator(args.target, "umvue")
    config = McConfig(
        n=args.n, seed=args.seed, replicates=args.reps, mu_grid=(args.mu,)
    )
    from .estimators import evaluate_arrays
    from .mc import _simulate_block

    z1, z2, s, _ = _simulate_block(config, 0, args.mu, target)
    est = evaluate_arrays(spec, config.n, z1, z2, s)
    mc_mean = float(est.mean())
    se = float(est.std(ddof=1) / math.sqrt(config.replicates))
    theta1 = config.theta1
    theta2 = theta1 + args.mu * config.sigma / config.n
    half_tail = (theta2 - theta1) * math.exp(-args.mu) / 2.0
    expected = theta2 - half_tail if target is Target.BEST else theta1 + half_tail
    sys.stdout.write(
        f"target={args.target}\nn={args.n}\nmu={args.mu:g}\n"
        f"mc_mean={mc_mean:.8g}\nexpected_target={expected:.8g}\n"
        f"difference={mc_mean - expected:.8g}\nse={se:.4g}\n"
    )
    return 0


def cmd_psi(args) -> int:
    target = Target(args.target)
    value = psi_mu(args.w, args.mu, args.n, target)
    lower, upper = psi_envelopes(args.w, args.n, target)
    fmt = lambda b: "unbounded" if b is UNBOUNDED else f"{b:.8g}"
    sys.stdout.write(
        f"target={args.target}\nw={args.w:g}\nmu={args.mu:g}\nn={args.n}\n"
        f"psi_mu={'unbounded' if math.isinf(value) else f'{value:.8g}'}\n"
        f"envelope_lower={fmt(lower)}\nenvelope_upper={fmt(upper)}\n"
    )
    if args.validate:
        analytic, empirical, se = validate_psi(
            args.w, args.mu, args.n, target, seed=args.seed, budget=args.reps
        )
        sys.stdout.write(
            f"validate_analytic={analytic:.8g}\nvalidate_empirical={empirical:.8g}\n"
            f"validate_se={se:.4g}\n"
        )
    return 0


def cmd_replay(args) -> int:
    entries: Dict[str, str] = {}
    for raw in Path(args.manifest).read_text().splitlines():
        line = raw.strip()
        if not line:
            continue
        key, _, value = line.partition("=")
        entries[key] = value
    command = entries.get("command")
    if not command:
        raise CliError(f"{args.manifest}: missing command key")
    argv = [command]
    for key, value in entries.items():
        if key.startswith("arg."):
            argv.append("--" + key[4:].replace("_", "-"))
            argv.append(value)
    return main(argv)


# --- argument plumbing ------------------------------------------------------


def _add_mu_grid_flags(p, cfg):
    p.add_argument("--mu-min", type=float, default=float(cfg.get("mu_min", 0.0)))
    p.add_argument("--mu-max", type=float, default=float(cfg.get("mu_max", 6.0)))
    p.add_argument("--mu-step", type=float, default=float(cfg.get("mu_step", 0.1)))


def _add_mc_flags(p, cfg):
    p.add_argument("--reps", type=int, default=int(cfg.get("reps", 20000)))
    p.add_argument("--seed", type=int, default=int(cfg.get("seed", 0)))


def build_parser(cfg: Dict[str, str]) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="selexp",
        description="Estimation after selection for two exponential populations",
    )
    parser.add_argument("--config", help="key=value config file (flags override it)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("risk-curve", help="analytic and/or Monte Carlo risk curves")
    p.add_argument("--target", choices=["best", "worst"], default=cfg.get("target", "best"))
    p.add_argument("--estimators", required="estimators" not in cfg,
                   default=cfg.get("estimators"))
    p.add_argument("--n", type=int, default=int(cfg.get("n", 3)))
    _add_mu_grid_flags(p, cfg)
    p.add_argument("--mode", choices=["analytic", "mc", "both"], default=cfg.get("mode", "both"))
    _add_mc_flags(p, cfg)
    p.add_argument("--out", required="out" not in cfg, default=cfg.get("out"))
    p.add_argument("--svg", default=cfg.get("svg"))
    p.set_defaults(func=cmd_risk_curve)

    p = sub.add_parser("minimax", help="restricted minimax coefficient and sup-risk")
    p.add_argument("--target", choices=["best", "worst"], default=cfg.get("target", "best"))
    p.add_argument("--n", type=int, default=int(cfg.get("n", 3)))
    p.add_argument("--out", default=cfg.get("out"))
    p.set_defaults(func=cmd_minimax)

    p = sub.add_parser("dominate", help="paired CRN domination comparison")
    p.add_argument("--target", choices=["best", "worst"], default=cfg.get("target", "best"))
    p.add_argument("--base", required="base" not in cfg, default=cfg.get("base"))
    p.add_argument("--challenger", required="challenger" not in cfg,
                   default=cfg.get("challenger"))
    p.add_argument("--n", type=int, default=int(cfg.get("n", 3)))
    _add_mu_grid_flags(p, cfg)
    _add_mc_flags(p, cfg)
    p.add_argument("--out", default=cfg.get("out"))
    p.set_defaults(func=cmd_dominate)

    p = sub.add_parser("umvue-check", help="Monte Carlo unbiasedness check of the UMVUE")
    p.add_argument("--target", choices=["best", "worst"], default=cfg.get("target", "best"))
    p.add_argument("--n", type=int, default=int(cfg.get("n", 3)))
    p.add_argument("--mu", type=float, default=float(cfg.get("mu", 0.0)))
    _add_mc_flags(p, cfg)
    p.set_defaults(func=cmd_umvue_check)

    p = sub.add_parser("psi", help="conditional-risk minimizer and envelopes")
    p.add_argument("--target", choices=["best", "worst"], default=cfg.get("target", "best"))
    p.add_argument("--w", type=float, required="w" not in cfg,
                   default=float(cfg["w"]) if "w" in cfg else None)
    p.add_argument("--mu", type=float, default=float(cfg.get("mu", 0.0)))
    p.add_argument("--n", type=int, default=int(cfg.get("n", 3)))
    p.add_argument("--validate", action="store_true")
    p.add_argument("--reps", type=int, default=int(cfg.get("reps", 400000)))
    p.add_argument("--seed", type=int, default=int(cfg.get("seed", 0)))
    p.set_defaults(func=cmd_psi)

    p = sub.add_parser("replay", help="re-run a command from its manifest")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_replay)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        cfg: Dict[str, str] = {}
        if "--config" in argv:
            cfg = _load_config_file(argv[argv.index("--config") + 1])
        parser = build_parser(cfg)
        args = parser.parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
