"""Command-line interface: selection, bounds, verification, and sweeps.

Exit codes: 0 success, 2 argument/parse/validation errors, 1 numerical
failures, 3 verification found a violated invariant.  Human-readable output
rounds to 6 significant digits; --json emits full precision.  Log verbosity
comes from the SENSOR_SELECT_LOG environment variable (error, warn, info,
debug; default warn), written to the error stream.
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict

import numpy as np

from ._files import atomic_write_text
from ._version import __version__
from .bounds import compute_bounds, guarantee_coefficient
from .errors import (
    BudgetError,
    ConsistencyError,
    ModelFormatError,
    NumericalError,
    SensorSelectError,
)
from .experiments import load_config, run_sweep, write_sweep_csv, write_sweep_metadata
from .greedy import greedy_select
from .model import build_stacked, load_model
from .objective import mse
from .oracle import (
    ENUMERATION_BUDGET,
    RATIO_MAX_SENSORS,
    brute_force_optimum,
    exact_ratios,
    monte_carlo_mse,
    simulate_sample,
    state_trajectory,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_USAGE = 2
EXIT_VERIFY_FAILED = 3

_LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


def _setup_logging() -> None:
    raw = os.environ.get("SENSOR_SELECT_LOG", "warn").strip().lower()
    level = _LOG_LEVELS.get(raw)
    if level is None:
        print(
            f"warning: SENSOR_SELECT_LOG={raw!r} not one of {sorted(_LOG_LEVELS)}; "
            f"using warn", file=sys.stderr,
        )
        level = logging.WARNING
    logging.basicConfig(
        level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )


def _fmt(x: float) -> str:
    return format(float(x), ".6g")


def _emit(text: str, output_path: str | None) -> None:
    if output_path is None:
        print(text)
    else:
        atomic_write_text(output_path, text + "\n")


def _seed_value(raw: str) -> int:
    value = int(raw)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must fit in unsigned 64 bits, got {value}")
    return value


def cmd_select(args) -> int:
    model = load_model(args.model)
    if args.s < 1 or args.s > model.p:
        print(
            f"error: -s must lie in 1..{model.p} for this model, got {args.s}",
            file=sys.stderr,
        )
        return EXIT_USAGE
    stacked = build_stacked(model)
    result = greedy_select(stacked, args.s)
    if args.json:
        payload = {
            "steps": [asdict(step) for step in result.steps],
            "selected": list(result.selected.indices),
            "s": result.s,
        }
        _emit(json.dumps(payload, indent=2), args.output)
    else:
        lines = [f"{'step':>4}  {'sensor':>6}  {'gain':>12}  {'J':>12}  {'f':>12}"]
        for i, step in enumerate(result.steps, start=1):
            lines.append(
                f"{i:>4}  {step.chosen:>6}  {_fmt(step.gain):>12}  "
                f"{_fmt(step.j_after):>12}  {_fmt(step.f_after):>12}"
            )
        lines.append(f"selected: {list(result.selected.indices)}")
        _emit("\n".join(lines), args.output)
    return EXIT_OK


def cmd_bounds(args) -> int:
    model = load_model(args.model)
    stacked = build_stacked(model)
    report = compute_bounds(stacked)
    if args.json:
        _emit(json.dumps(asdict(report), indent=2), args.output)
    else:
        lines = [
            f"gamma_lower     {_fmt(report.gamma_lower)}",
            f"alpha_upper     {_fmt(report.alpha_upper)}",
            f"coeff_ours      {_fmt(report.coeff_ours)}",
            f"coeff_chamon    {_fmt(report.coeff_chamon)}",
            f"gamma_summers   {_fmt(report.gamma_summers)}",
            f"alpha_summers   {_fmt(report.alpha_summers)}",
            f"coeff_summers   {_fmt(report.coeff_summers)}",
            f"lambda_min_L    {_fmt(report.lambda_min_L)}",
            f"lambda_max_LUI  {_fmt(report.lambda_max_LUI)}",
        ]
        _emit("\n".join(lines), args.output)
    return EXIT_OK


def _verify_checks(model, s: int, trials: int, seed: int) -> list[tuple[str, str, str]]:
    """Run the oracle invariants; returns (name, status, detail) rows."""
    checks: list[tuple[str, str, str]] = []
    stacked = build_stacked(model)
    result = greedy_select(stacked, s)
    f_greedy = result.steps[-1].f_after
    report = compute_bounds(stacked)

    import math

    budget = sum(math.comb(model.p, k) for k in range(s + 1))
    ratios = None
    if model.p <= RATIO_MAX_SENSORS:
        ratios = exact_ratios(stacked)

    if budget > ENUMERATION_BUDGET:
        checks.append((
            "guarantee-chain", "SKIP",
            f"{budget} subsets exceed the enumeration cap of {ENUMERATION_BUDGET}",
        ))
    else:
        _, f_star = brute_force_optimum(stacked, s)
        lower = guarantee_coefficient(report.gamma_lower, report.alpha_upper) * f_star - 1e-9
        ok = f_greedy >= lower
        detail = (
            f"f_greedy={_fmt(f_greedy)} f_star={_fmt(f_star)} "
            f"spectral_floor={_fmt(lower)}"
        )
        if ratios is not None:
            mid = guarantee_coefficient(ratios.gamma_exact, ratios.alpha_exact) * f_star
            ok = ok and (f_greedy >= mid - 1e-9) and (mid >= lower - 1e-9)
            detail += f" exact_floor={_fmt(mid)}"
        checks.append(("guarantee-chain", "PASS" if ok else "FAIL", detail))

    if ratios is None:
        checks.append((
            "ratio-ordering", "SKIP",
            f"p={model.p} exceeds the exact enumeration limit of {RATIO_MAX_SENSORS}",
        ))
    else:
        ok = (
            ratios.beta_exact <= ratios.gamma_exact + 1e-9
            and -1e-9 <= ratios.gamma_exact <= 1 + 1e-9
            and -1e-9 <= ratios.alpha_exact <= 1 + 1e-9
        )
        checks.append((
            "ratio-ordering", "PASS" if ok else "FAIL",
            f"beta={_fmt(ratios.beta_exact)} gamma={_fmt(ratios.gamma_exact)} "
            f"alpha={_fmt(ratios.alpha_exact)}",
        ))

    j_selected = mse(stacked, result.selected).j
    mean, std_err = monte_carlo_mse(model, result.selected, trials, seed)
    tol = 3.0 * std_err + 1e-12 * (1.0 + j_selected)
    ok = abs(mean - j_selected) <= tol
    checks.append((
        "monte-carlo", "PASS" if ok else "FAIL",
        f"mean={_fmt(mean)} J={_fmt(j_selected)} |diff|={_fmt(abs(mean - j_selected))} "
        f"3*SE={_fmt(3.0 * std_err)} trials={trials}",
    ))

    sample = simulate_sample(model, result.selected, seed)
    states = state_trajectory(model, sample.z_bar)
    n, ell = model.n, model.ell
    x = sample.z_bar[:n]
    worst = float(np.max(np.abs(states[0] - x)))
    for k in range(1, ell):
        x = model.A @ x + sample.z_bar[k * n:(k + 1) * n]
        worst = max(worst, float(np.max(np.abs(states[k] - x))))
    scale = 1.0 + float(np.max(np.abs(states)))
    ok = worst <= 1e-9 * scale
    checks.append((
        "state-reconstruction", "PASS" if ok else "FAIL",
        f"max deviation {worst:.3e} (scale {scale:.3e})",
    ))
    return checks


def cmd_verify(args) -> int:
    model = load_model(args.model)
    s = args.s if args.s is not None else min(2, model.p)
    if s < 1 or s > model.p:
        print(
            f"error: -s must lie in 1..{model.p} for this model, got {s}",
            file=sys.stderr,
        )
        return EXIT_USAGE
    if args.trials < 100:
        print(f"error: --trials must be at least 100, got {args.trials}", file=sys.stderr)
        return EXIT_USAGE
    checks = _verify_checks(model, s, args.trials, args.seed)
    failed = any(status == "FAIL" for _, status, _ in checks)
    overall = "FAIL" if failed else "PASS"
    if args.json:
        payload = {
            "checks": [
                {"name": name, "status": status, "detail": detail}
                for name, status, detail in checks
            ],
            "overall": overall,
        }
        _emit(json.dumps(payload, indent=2), args.output)
    else:
        lines = [
            f"[{status}] {name:<22} {detail}" for name, status, detail in checks
        ]
        lines.append(f"overall: {overall}")
        _emit("\n".join(lines), args.output)
    return EXIT_VERIFY_FAILED if failed else EXIT_OK


def cmd_sweep(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        import dataclasses

        config = dataclasses.replace(config, seed=args.seed)
    if args.threads < 1:
        print(f"error: --threads must be >= 1, got {args.threads}", file=sys.stderr)
        return EXIT_USAGE
    logger.info(
        "sweep: n=%d ell=%d trials=%d grid=%d points seed=%d",
        config.n, config.ell, config.trials, len(config.ratio_db_grid), config.seed,
    )
    records = run_sweep(config, threads=args.threads)
    write_sweep_csv(records, args.output)
    sidecar = write_sweep_metadata(config, args.output)
    logger.info("wrote %s and %s", args.output, sidecar)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sensor-select",
        description="Greedy sensor selection for finite-horizon smoothing, "
        "with computable near-optimality certificates.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_select = sub.add_parser("select", help="run greedy selection on a model file")
    p_select.add_argument("model", help="model JSON file")
    p_select.add_argument("-s", type=int, required=True, help="number of sensors to select")
    p_select.add_argument("--json", action="store_true", help="machine-readable output")
    p_select.add_argument("--output", default=None, help="write output to this file")
    p_select.set_defaults(func=cmd_select)

    p_bounds = sub.add_parser("bounds", help="compute guarantee bounds for a model file")
    p_bounds.add_argument("model", help="model JSON file")
    p_bounds.add_argument("--json", action="store_true", help="machine-readable output")
    p_bounds.add_argument("--output", default=None, help="write output to this file")
    p_bounds.set_defaults(func=cmd_bounds)

    p_verify = sub.add_parser(
        "verify", help="check the oracle invariants on a model file"
    )
    p_verify.add_argument("model", help="model JSON file")
    p_verify.add_argument("-s", type=int, default=None, help="selection size (default min(2, p))")
    p_verify.add_argument("--trials", type=int, default=10000, help="Monte Carlo trials")
    p_verify.add_argument("--seed", type=_seed_value, default=0, help="random seed")
    p_verify.add_argument("--json", action="store_true", help="machine-readable output")
    p_verify.add_argument("--output", default=None, help="write output to this file")
    p_verify.set_defaults(func=cmd_verify)

    p_sweep = sub.add_parser("sweep", help="run a noise-ratio sweep from a config file")
    p_sweep.add_argument("config", help="sweep config JSON file")
    p_sweep.add_argument("--output", required=True, help="CSV output path")
    p_sweep.add_argument("--seed", type=_seed_value, default=None, help="override config seed")
    p_sweep.add_argument("--threads", type=int, default=1, help="worker thread cap")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except (ModelFormatError, BudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, ConsistencyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SensorSelectError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
