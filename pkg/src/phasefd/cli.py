"""Command-line interface.

Subcommands:
  run        advance one configured simulation and write its outputs
  stability  perturbation + gradient-stability verdicts over a dt list
  bench      per-step wall time vs grid size with a fitted exponent
  limits     explicit stability bound and splitting-weight range for a config

Exit codes: 0 success, 1 runtime failure (including unexpected
divergence), 2 usage or configuration errors.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import RunConfig, load_config
from .errors import PhasefdError
from .experiments import (
    RecordingSpec,
    Scenario,
    gradient_stability_check,
    perturbation_stability_test,
    realize_initial,
    run_simulation,
    scaling_benchmark,
)
from .explicit import explicit_stability_limit
from .models import Model, SolverKind
from .output import write_outputs
from .splitting import phi_max_estimate, xi_critical


def _scenario_from_config(cfg: RunConfig) -> Scenario:
    return Scenario(
        name="config",
        grid=cfg.grid,
        model=cfg.model,
        constants=cfg.constants,
        schedule=cfg.schedule,
        initial=cfg.initial,
        t_final=cfg.t_final,
    )


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    scenario = _scenario_from_config(cfg)
    result = run_simulation(
        scenario, cfg.solver, cfg.dt, policy=cfg.splitting, record=cfg.recording
    )
    written = write_outputs(result, cfg, force=args.force)
    for path in written:
        print(path)
    if result.diverged_at is not None:
        print(f"run diverged at step {result.diverged_at}", file=sys.stderr)
        return 1
    return 0


def _parse_dt_list(raw: str) -> list[float]:
    try:
        values = [float(part) for part in raw.split(",") if part.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse dt list {raw!r}")
    if not values:
        raise argparse.ArgumentTypeError("dt list is empty")
    return values


def _parse_size_list(raw: str) -> list[int]:
    try:
        values = [int(part) for part in raw.split(",") if part.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse size list {raw!r}")
    if not values:
        raise argparse.ArgumentTypeError("size list is empty")
    return values


def _cmd_stability(args) -> int:
    cfg = load_config(args.config)
    scenario = _scenario_from_config(cfg)
    print(f"{'dt':>12}  {'verdict':>9}  {'gradient_stable':>15}  {'max_growth':>11}")
    for dt in args.dt_list:
        outcome = perturbation_stability_test(
            scenario,
            cfg.solver,
            dt,
            magnitude=args.magnitude,
            seed=cfg.seed,
            policy=cfg.splitting,
            record=RecordingSpec(series_stride=cfg.recording.series_stride),
        )
        energies = [rec.free_energy for rec in outcome.base.series]
        grad_ok = gradient_stability_check(energies)
        growth = (
            f"{outcome.max_growth:.3e}" if np.isfinite(outcome.max_growth) else "inf"
        )
        print(
            f"{dt:>12g}  {outcome.verdict.value:>9}  {str(grad_ok).lower():>15}  {growth:>11}"
        )
    return 0


def _cmd_bench(args) -> int:
    result = scaling_benchmark(
        Model(args.model),
        SolverKind(args.solver),
        sizes=args.sizes,
        steps_per_size=args.steps,
        repeats=args.repeats,
    )
    print(f"{'N':>6}  {'DoF':>10}  {'sec/step':>12}")
    for row in result.rows:
        print(f"{row.size:>6}  {row.dof:>10}  {row.seconds_per_step:>12.6e}")
    if result.exponent is None:
        print(f"fitted exponent: undefined ({result.note})")
    else:
        print(f"fitted exponent: {result.exponent:.3f}")
    return 0


def _cmd_limits(args) -> int:
    cfg = load_config(args.config)
    limit = explicit_stability_limit(cfg.model, cfg.constants.gamma, cfg.grid.dr)
    print(f"model: {cfg.model.value}")
    print(f"explicit stability limit dt_cri = {limit:.6g}")
    phi0 = realize_initial(cfg.initial, cfg.grid, cfg.schedule)
    phi_max = phi_max_estimate(phi0, cfg.splitting)
    values = []
    for row in cfg.schedule.rows:
        for region, (T, _h) in row.values.items():
            if T != 0.0:
                crit = xi_critical(T, phi_max)
                values.append((row.t_begin, row.t_end, region, T, crit))
    if values:
        lo = min(v[4].value for v in values)
        hi = max(v[4].value for v in values)
        print(
            f"critical splitting weight over schedule (phi_max = {phi_max:.6g}): "
            f"[{lo:.6g}, {hi:.6g}]"
        )
        for t0, t1, region, T, crit in values:
            print(
                f"  t in ({t0:g}, {t1:g}] region {region}: T = {T:g}, "
                f"xi_cri = {crit.value:.6g} (stable side {crit.side.value})"
            )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phasefd",
        description="Explicit and direct-implicit phase-field solvers on uniform 2-D grids",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one configured simulation")
    p_run.add_argument("--config", required=True)
    p_run.add_argument(
        "--force", action="store_true", help="replace an existing output directory"
    )
    p_run.set_defaults(func=_cmd_run)

    p_st = sub.add_parser("stability", help="stability verdicts over a dt list")
    p_st.add_argument("--config", required=True)
    p_st.add_argument("--dt-list", required=True, type=_parse_dt_list)
    p_st.add_argument(
        "--magnitude", type=float, default=1e-6, help="perturbation magnitude"
    )
    p_st.set_defaults(func=_cmd_stability)

    p_bench = sub.add_parser("bench", help="per-step scaling benchmark")
    p_bench.add_argument("--model", choices=[m.value for m in Model], required=True)
    p_bench.add_argument(
        "--solver", choices=[s.value for s in SolverKind], required=True
    )
    p_bench.add_argument("--sizes", required=True, type=_parse_size_list)
    p_bench.add_argument("--steps", type=int, default=12)
    p_bench.add_argument("--repeats", type=int, default=3)
    p_bench.set_defaults(func=_cmd_bench)

    p_lim = sub.add_parser("limits", help="stability limit and splitting range")
    p_lim.add_argument("--config", required=True)
    p_lim.set_defaults(func=_cmd_limits)

    return parser


def cli_main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_err:
        # argparse exits with 2 on usage errors and 0 on --help
        return int(exit_err.code or 0)
    try:
        return args.func(args)
    except PhasefdError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except FileExistsError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # runtime failures
        print(f"runtime error: {err}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())
