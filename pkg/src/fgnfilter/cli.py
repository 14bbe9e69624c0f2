"""Command line entry point: ``fgnfilter <subcommand> [flags]``.

Results go to files under ``--out``; diagnostics go to stderr. Exit status is
0 on success, 1 on invalid input and 2 when the optimizer does not converge.
"""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import __version__
from ._jit import BACKEND
from .config import RunConfig, load_config
from .covariance import cost, error_covariance_closed, error_covariance_oracle
from .model import FilterGain, ValidationError, WeightSpec, random_system
from .montecarlo import simulate_ensemble, simulate_path
from .noise import NoiseModel, autocovariance_table, derived_rng, sample_fgn
from .optimizer import NotConvergedError, OptimizerOptions, multi_start, stationarity_certificate
from .report import FORMATS, Report, emit_report
from .twostep import example_system, printed_conditions, solve_two_step_example
from .variation import gradient, gradient_report, mode_signature

logger = logging.getLogger("fgnfilter")

DEFAULT_RHOS = (0.25, 0.5, 0.75)
DEFAULT_WEIGHT_PAIRS = ((1.0, 1.0), (1.0, 2.0), (0.0, 1.0), (1.0, 0.0))
GRADCHECK_HORIZON = 6


def _joined(values) -> str:
    return " ".join(format(float(v), ".17g") for v in values)


def _resolved(args, *, need_config=True) -> RunConfig | None:
    if args.config is None:
        if need_config:
            raise ValidationError(["--config: required for this subcommand"])
        return None
    cfg = load_config(args.config)
    return cfg.with_overrides(
        seed=args.seed,
        paths=getattr(args, "paths", None),
        starts=args.starts,
        tolerance=args.tol,
        max_iterations=args.max_iters,
    )


def _k_table(system, gain):
    kc = error_covariance_closed(system, gain)
    ko = error_covariance_oracle(system, gain)
    rows = [(k, kc[k], ko[k], abs(kc[k] - ko[k])) for k in range(system.horizon + 1)]
    return ("k", "K_closed", "K_oracle", "abs_diff"), rows, kc, ko


def cmd_evaluate(args) -> tuple[Report, int]:
    cfg = _resolved(args)
    header, rows, kc, ko = _k_table(cfg.system, cfg.gain)
    rep = Report("evaluate")
    rep.add_table("evaluate", header, rows)
    disc = np.abs(kc - ko) / np.maximum(1.0, np.abs(ko))
    rep.summary = {
        "config": cfg.to_dict(),
        "J": cost(ko, cfg.weights),
        "J_closed": cost(kc, cfg.weights),
        "max_discrepancy": float(disc.max()),
        "mode": args.mode,
        "residual": float(np.max(np.abs(gradient(cfg.system, cfg.gain, cfg.weights, args.mode)))),
        "backend": BACKEND,
    }
    return rep, 0


def cmd_optimize(args) -> tuple[Report, int]:
    cfg = _resolved(args)
    status = 0
    try:
        res = multi_start(cfg.system, cfg.weights, cfg.optimizer)
    except NotConvergedError as exc:
        logger.error("%s", exc)
        res, status = exc.result, 2
    gain = res.best_gain
    gv = gradient(cfg.system, gain, cfg.weights, "validated")
    gp = gradient(cfg.system, gain, cfg.weights, "paper")
    rep = Report("optimize")
    rep.add_table(
        "optimize",
        ("k", "gamma", "g_validated", "g_paper"),
        [(k, gain.gamma_gain[k], gv[k], gp[k]) for k in range(cfg.system.horizon)],
    )
    header, rows, _, _ = _k_table(cfg.system, gain)
    rep.add_table("optimize_K", header, rows)
    rep.add_table(
        "optimize_starts",
        ("start_index", "start", "gain", "cost", "residual", "iterations", "converged"),
        [
            (i, _joined(r.start), _joined(r.gain), r.cost, r.residual, r.iterations, r.converged)
            for i, r in enumerate(res.all_starts)
        ],
    )
    cert = stationarity_certificate(cfg.system, gain, cfg.weights, cfg.optimizer.tolerance)
    rep.add_table(
        "optimize_certificate",
        ("equation", "index", "mode", "residual"),
        [(r["equation"], r["index"], r["mode"], r["residual"]) for r in cert.rows()],
    )
    rep.summary = {
        "config": cfg.to_dict(),
        "J": res.best_cost,
        "residual": res.residual,
        "iterations": res.iterations,
        "seed": cfg.optimizer.seed,
        "converged": status == 0,
        "converged_starts": sum(r.converged for r in res.all_starts),
        "certified": cert.certified,
        "structural_zero": cert.structural_zero.tolist(),
        "backend": BACKEND,
    }
    return rep, status


def cmd_gradcheck(args) -> tuple[Report, int]:
    cfg = _resolved(args, need_config=False)
    if cfg is None:
        seed = args.seed or 0
        rng = np.random.default_rng(seed)
        system = random_system(rng, GRADCHECK_HORIZON, hursts=(0.55, 0.7, 0.85))
        gain = FilterGain(rng.uniform(-2.0, 2.0, GRADCHECK_HORIZON))
        weights = WeightSpec(rng.uniform(0.0, 1.0, GRADCHECK_HORIZON + 1))
        echo = system.to_dict()
        echo.update(weights=weights.a.tolist(), gain=gain.gamma_gain.tolist(), seed=seed)
    else:
        system, gain, weights, echo = cfg.system, cfg.gain, cfg.weights, cfg.to_dict()
    rep_v = gradient_report(system, gain, weights, "validated")
    gp = gradient(system, gain, weights, "paper")
    abs_err = np.abs(rep_v.g - rep_v.g_fd)
    rel_err = rep_v.fd_error
    report = Report("gradcheck")
    report.add_table(
        "gradcheck",
        ("i", "g_paper", "g_validated", "g_fd", "abs_err", "rel_err"),
        [(i, gp[i], rep_v.g[i], rep_v.g_fd[i], abs_err[i], rel_err[i]) for i in range(system.horizon)],
    )
    sig = mode_signature(system, gain)
    report.summary = {
        "config": echo,
        "max_rel_err": float(rel_err.max()),
        "mode": args.mode,
        "residual": float(np.max(np.abs(gp if args.mode == "paper" else rep_v.g))),
        "max_paper_vs_validated": float(np.max(np.abs(gp - rep_v.g))),
        "q2_ratio": float(np.nanmedian(sig["q2"])) if np.any(np.isfinite(sig["q2"])) else None,
        "q3_ratio": float(np.nanmedian(sig["q3"])) if np.any(np.isfinite(sig["q3"])) else None,
        "backend": BACKEND,
    }
    return report, 0


def cmd_simulate(args) -> tuple[Report, int]:
    cfg = _resolved(args)
    stats = simulate_ensemble(cfg.system, cfg.gain, cfg.paths, cfg.seed)
    K = error_covariance_oracle(cfg.system, cfg.gain)
    rep = Report("simulate")
    rep.add_table(
        "simulate",
        ("k", "K_analytic", "K_empirical", "se", "mean_error"),
        [(k, K[k], stats.empirical_K[k], stats.se_K[k], stats.mean_error[k]) for k in range(cfg.system.horizon + 1)],
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(stats.se_K > 0, np.abs(stats.empirical_K - K) / stats.se_K, 0.0)
    rep.summary = {
        "config": cfg.to_dict(),
        "n_paths": stats.n_paths,
        "seed": stats.seed,
        "max_se_units": float(z.max()),
        "backend": BACKEND,
    }
    return rep, 0


def cmd_example(args) -> tuple[Report, int]:
    rhos = args.rho or list(DEFAULT_RHOS)
    if args.a1 or args.a2:
        a1s = args.a1 or [0.0] * len(args.a2)
        a2s = args.a2 or [0.0] * len(args.a1)
        if len(a1s) != len(a2s):
            raise ValidationError(["--a1/--a2: give the same number of values"])
        pairs = list(zip(a1s, a2s))
    else:
        pairs = list(DEFAULT_WEIGHT_PAIRS)
    opts = OptimizerOptions(
        tolerance=args.tol or 1e-10,
        max_iterations=args.max_iters or 10_000,
        starts=args.starts or 8,
        seed=args.seed or 0,
    )
    n_paths = 3 if args.paths is None else args.paths
    roots_rows, opt_rows, path_rows = [], [], []
    status = 0
    for rho in rhos:
        system = example_system(rho)
        for a1, a2 in pairs:
            try:
                roots = solve_two_step_example(rho, a1, a2)
            except ValueError as exc:
                raise ValidationError([str(exc)]) from None
            for r in roots:
                c1, c2 = printed_conditions(rho, a1, a2, r.gamma0, r.gamma1)
                roots_rows.append((rho, a1, a2, r.index, r.gamma0, r.gamma1, r.poly_residual))
                logger.debug("root %d: printed conditions %.3e %.3e", r.index, c1, c2)
            weights = WeightSpec([0.0, a1, a2])
            try:
                res = multi_start(system, weights, opts)
                converged = True
            except NotConvergedError as exc:
                res, converged, status = exc.result, False, 2
            g = res.best_gain.gamma_gain
            opt_rows.append((rho, a1, a2, g[0], g[1], res.best_cost, res.residual, converged))
            for p in range(n_paths):
                path = simulate_path(system, res.best_gain, opts.seed, p)
                for k in range(system.horizon + 1):
                    path_rows.append((rho, a1, a2, p, k, path.x[k], path.z[k]))
    rep = Report("example")
    rep.add_table("example", ("rho", "a1", "a2", "root_index", "gamma0", "gamma1", "poly_residual"), roots_rows)
    rep.add_table(
        "example_validated", ("rho", "a1", "a2", "gamma0", "gamma1", "cost", "residual", "converged"), opt_rows
    )
    rep.add_table("example_paths", ("rho", "a1", "a2", "path", "k", "x", "z"), path_rows)
    rep.summary = {
        "config": {"rho": rhos, "weight_pairs": pairs, "optimizer": opts.to_dict(), "paths": n_paths},
        "roots": len(roots_rows),
        "backend": BACKEND,
    }
    return rep, status


def cmd_noise(args) -> tuple[Report, int]:
    cfg = _resolved(args, need_config=False)
    if args.hurst:
        hursts = args.hurst
    elif cfg is not None:
        hursts = sorted({cfg.system.hurst1, cfg.system.hurst2})
    else:
        hursts = [0.5, 0.6, 0.75, 0.9]
    try:
        models = [NoiseModel(h) for h in hursts]
    except ValueError as exc:
        raise ValidationError([f"--hurst: {exc}"]) from None
    seed = args.seed if args.seed is not None else (cfg.seed if cfg else 0)
    n_paths = args.paths or 0
    rows, path_rows = [], []
    for idx, m in enumerate(models):
        rho = autocovariance_table(m, args.lags + 1)
        rows.extend((lag, m.hurst, rho[lag]) for lag in range(args.lags + 1))
        if n_paths:
            w = sample_fgn(m, args.length, derived_rng(seed, idx), size=n_paths)
            for p in range(n_paths):
                path_rows.extend((m.hurst, p, k, w[p, k]) for k in range(args.length))
    rep = Report("noise")
    rep.add_table("noise", ("lag", "hurst", "rho"), rows)
    if n_paths:
        rep.add_table("noise_paths", ("hurst", "path", "k", "w"), path_rows)
    rep.summary = {
        "config": {"hurst": [m.hurst for m in models], "lags": args.lags, "paths": n_paths, "length": args.length, "seed": seed},
        "backend": BACKEND,
    }
    return rep, 0


COMMANDS = {
    "optimize": (cmd_optimize, "minimize the weighted error covariance over the gain"),
    "evaluate": (cmd_evaluate, "closed-form and oracle K plus cost for a given gain"),
    "gradcheck": (cmd_gradcheck, "compare paper, validated and finite-difference gradients"),
    "simulate": (cmd_simulate, "Monte Carlo error statistics against the analytic K"),
    "example": (cmd_example, "two-step example: quintic roots and numerical optima"),
    "noise": (cmd_noise, "fractional noise autocovariance table and sample paths"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fgnfilter", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--format", choices=FORMATS, default="csv")
        p.add_argument("--seed", type=int)
        p.add_argument("--paths", type=int)
        p.add_argument("--starts", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--max-iters", type=int)
        p.add_argument("--mode", choices=("paper", "validated"), default="validated")
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "example":
            p.add_argument("--rho", type=float, nargs="+")
            p.add_argument("--a1", type=float, nargs="+")
            p.add_argument("--a2", type=float, nargs="+")
        if name == "noise":
            p.add_argument("--hurst", type=float, nargs="+")
            p.add_argument("--lags", type=int, default=16)
            p.add_argument("--length", type=int, default=64, help="sample path length")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    handler = COMMANDS[args.command][0]
    try:
        report, status = handler(args)
        written = emit_report(report, args.format, args.out)
    except ValidationError as exc:
        for err in exc.errors:
            print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for p in written:
        logger.info("wrote %s", p)
    return status


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
