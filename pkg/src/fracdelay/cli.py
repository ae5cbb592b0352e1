"""Command-line front end.

Subcommands:
  simulate  integrate a system config, write a trajectory CSV
  analyze   static analysis (positivity / attractivity / bound), write JSON
  example   materialize a built-in scenario and run simulate + analyze
  mlf       evaluate the two-parameter Mittag-Leffler function

Exit codes: 0 success, 1 config or validation failure, 2 runtime numeric
failure.  That contract is stable for scripting.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import analysis as an
from . import solver
from .errors import (
    AccuracyError,
    ConfigError,
    DomainError,
    ExprEvalError,
    FracDelayError,
    LinearAlgebraError,
    ValidationError,
)
from .scenarios import SCENARIOS, get_scenario
from .special_functions import mittag_leffler
from .system_model import load_config, system_from_config, validate_system

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERIC = 2


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _load_system(config_path: str):
    doc = load_config(config_path)
    return system_from_config(doc)


def _oracle_path(out_path: str) -> Path:
    p = Path(out_path)
    return p.with_name(p.stem + "_picard" + (p.suffix or ".csv"))


def _run_simulate(
    system,
    init,
    step: float,
    t_end: float,
    out_path: str,
    oracle: str | None,
    oracle_tol: float,
) -> int:
    grid = solver.Grid.for_horizon(step, t_end)
    report = validate_system(system, init, grid.t_end)
    hard = [m for m in report.failures() if not m.startswith("(T4)")]
    if hard:
        return _fail("validation failed: " + "; ".join(hard), EXIT_VALIDATION)

    traj = solver.simulate(system, init, grid)
    traj.write_csv(out_path)
    print(f"trajectory: {out_path} ({len(traj.times)} rows)")

    if oracle == "picard":
        ref = solver.picard_solve(system, init, grid, tol=oracle_tol)
        ref_path = _oracle_path(out_path)
        ref.write_csv(ref_path)
        diff = solver.sup_norm_difference(traj, ref)
        converged = ref.scheme_metadata.get("converged", False)
        print(f"oracle trajectory: {ref_path}")
        print(f"oracle sup-norm difference: {diff:.6e}" + ("" if converged else " (oracle not converged)"))
        if not converged:
            return EXIT_NUMERIC
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        system, init = _load_system(args.config)
    except (ConfigError, FracDelayError) as exc:
        return _fail(str(exc), EXIT_VALIDATION)
    try:
        return _run_simulate(
            system, init, args.step, args.t_end, args.out, args.oracle, args.oracle_tol
        )
    except (ValidationError, DomainError) as exc:
        return _fail(str(exc), EXIT_VALIDATION)
    except (AccuracyError, ExprEvalError, LinearAlgebraError) as exc:
        return _fail(str(exc), EXIT_NUMERIC)


def _run_analyze(system, init, regime: str, f_cap, g_cap, out_path: str) -> int:
    # the analysis itself only needs the matrices, but a config whose
    # existence/uniqueness conditions fail should be rejected loudly
    report_v = validate_system(system, init, 1.0)
    if not report_v.existence_uniqueness_ok:
        failing = "(c1)" if not report_v.c1_ok else "(d1)"
        return _fail(
            f"condition {failing} fails: existence/uniqueness is not guaranteed",
            EXIT_VALIDATION,
        )
    report = an.analyze(system, regime=regime, F=f_cap, G=g_cap)
    report.write_json(out_path)
    for line in report.summary_lines():
        print(line)
    print(f"report: {out_path}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    try:
        system, init = _load_system(args.config)
    except (ConfigError, FracDelayError) as exc:
        return _fail(str(exc), EXIT_VALIDATION)
    f_cap = np.array(args.F, dtype=float) if args.F is not None else None
    g_cap = np.array(args.G, dtype=float) if args.G is not None else None
    try:
        return _run_analyze(system, init, args.regime, f_cap, g_cap, args.out)
    except (ValidationError, DomainError) as exc:
        return _fail(str(exc), EXIT_VALIDATION)
    except (AccuracyError, ExprEvalError, LinearAlgebraError) as exc:
        return _fail(str(exc), EXIT_NUMERIC)


def cmd_example(args) -> int:
    try:
        scenario = get_scenario(args.name)
    except KeyError as exc:
        return _fail(str(exc.args[0]), EXIT_VALIDATION)

    out_dir = Path(args.dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    config_path = out_dir / f"{scenario.name}_config.json"
    config_path.write_text(scenario.config_text, encoding="ascii", newline="\n")
    print(f"scenario config: {config_path}")

    try:
        system, init = system_from_config(scenario.config_doc())
    except (ConfigError, FracDelayError) as exc:
        return _fail(str(exc), EXIT_VALIDATION)

    traj_path = Path(args.dir) / f"{scenario.name}_trajectory.csv"
    analysis_path = Path(args.dir) / f"{scenario.name}_analysis.json"
    try:
        code = _run_simulate(
            system,
            init,
            args.step if args.step is not None else scenario.step,
            args.t_end if args.t_end is not None else scenario.t_end,
            str(traj_path),
            None,
            1e-10,
        )
        if code != EXIT_OK:
            return code
        return _run_analyze(
            system,
            init,
            scenario.regime,
            scenario.cap_f(),
            scenario.cap_g(),
            str(analysis_path),
        )
    except (ValidationError, DomainError) as exc:
        return _fail(str(exc), EXIT_VALIDATION)
    except (AccuracyError, ExprEvalError, LinearAlgebraError) as exc:
        return _fail(str(exc), EXIT_NUMERIC)


def cmd_mlf(args) -> int:
    try:
        value = mittag_leffler(args.alpha, args.beta, args.x)
    except (DomainError, AccuracyError) as exc:
        return _fail(str(exc), EXIT_VALIDATION)
    print(format(value, ".17g"))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracdelay",
        description=(
            "Simulate and analyze mixed-order fractional linear systems "
            "coupled with a delayed difference equation."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="integrate a system and write a trajectory CSV")
    p_sim.add_argument("config", help="path to a system config (JSON)")
    p_sim.add_argument("--step", type=float, required=True, help="grid step h")
    p_sim.add_argument("--t-end", type=float, required=True, help="end time")
    p_sim.add_argument("--out", default="trajectory.csv", help="trajectory CSV path")
    p_sim.add_argument(
        "--oracle",
        choices=["picard"],
        default=None,
        help="also run the fixed-point oracle and report the sup-norm difference",
    )
    p_sim.add_argument("--oracle-tol", type=float, default=1e-10, help="oracle iteration tolerance")
    p_sim.set_defaults(func=cmd_simulate)

    p_an = sub.add_parser("analyze", help="static analysis; writes a JSON report")
    p_an.add_argument("config", help="path to a system config (JSON)")
    p_an.add_argument("--F", type=float, nargs="+", default=None, help="exact forcing cap for f")
    p_an.add_argument("--G", type=float, nargs="+", default=None, help="exact forcing cap for g")
    p_an.add_argument(
        "--regime",
        choices=list(an.REGIMES),
        default="auto",
        help="forcing regime (auto: homogeneous when f and g are literal zeros, else bounded)",
    )
    p_an.add_argument("--out", default="analysis.json", help="report JSON path")
    p_an.set_defaults(func=cmd_analyze)

    p_ex = sub.add_parser("example", help="materialize and run a built-in scenario")
    p_ex.add_argument("name", choices=sorted(SCENARIOS), help="scenario name")
    p_ex.add_argument("--step", type=float, default=None, help="override the scenario step")
    p_ex.add_argument("--t-end", type=float, default=None, help="override the scenario end time")
    p_ex.add_argument("--dir", default=".", help="output directory")
    p_ex.set_defaults(func=cmd_example)

    p_ml = sub.add_parser("mlf", help="evaluate E_{alpha,beta}(x)")
    p_ml.add_argument("--alpha", type=float, required=True)
    p_ml.add_argument("--beta", type=float, default=1.0)
    p_ml.add_argument("--x", type=float, required=True)
    p_ml.set_defaults(func=cmd_mlf)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
