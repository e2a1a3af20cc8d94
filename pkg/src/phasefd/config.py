"""Run configuration: YAML parsing, validation, and serialization.

A configuration document is a nested key/value mapping; schedule rows are
written in the same shape as the benchmark parameter tables (t_begin,
t_end, per-region T and h) so those paste in directly.  Every validation
failure names the offending key.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .energetics import PhysicalConstants
from .errors import ConfigError
from .experiments import InitialCondition, InitialKind, RecordingSpec
from .grid import BoundaryCondition, Grid
from .models import Model, SolverKind
from .schedule import (
    MaskKind,
    ParameterSchedule,
    RegionMask,
    ScheduleRow,
    load_cell_map,
    uniform_mask,
)
from .splitting import SplittingPolicy, XiMode


@dataclass
class RunConfig:
    model: Model
    solver: SolverKind
    grid: Grid
    constants: PhysicalConstants
    dt: float
    t_final: float
    schedule: ParameterSchedule
    initial: InitialCondition
    splitting: SplittingPolicy = field(default_factory=SplittingPolicy)
    recording: RecordingSpec = field(default_factory=RecordingSpec)
    seed: int = 1234
    output_dir: Path = Path("run_output")


def _require(mapping: dict, key: str, context: str) -> Any:
    if key not in mapping:
        raise ConfigError(f"missing key '{context}{key}'")
    return mapping[key]


def _as_enum(enum_cls, raw, key: str):
    try:
        return enum_cls(raw)
    except ValueError:
        valid = ", ".join(e.value for e in enum_cls)
        raise ConfigError(f"key '{key}': unknown value {raw!r}, expected one of {valid}")


def _as_positive(raw, key: str) -> float:
    value = _as_float(raw, key)
    if not value > 0:
        raise ConfigError(f"key '{key}': must be positive, got {value}")
    return value


def _as_float(raw, key: str) -> float:
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"key '{key}': expected a number, got {raw!r}")


def _as_int(raw, key: str) -> int:
    try:
        return int(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"key '{key}': expected an integer, got {raw!r}")


def _parse_grid(raw: dict) -> Grid:
    if not isinstance(raw, dict):
        raise ConfigError("key 'grid': expected a mapping")
    try:
        return Grid(
            n=_as_int(_require(raw, "n", "grid."), "grid.n"),
            m=_as_int(_require(raw, "m", "grid."), "grid.m"),
            dr=_as_positive(_require(raw, "dr", "grid."), "grid.dr"),
            bc_y=_as_enum(BoundaryCondition, raw.get("bc_y", "periodic"), "grid.bc_y"),
            bc_x=_as_enum(BoundaryCondition, raw.get("bc_x", "periodic"), "grid.bc_x"),
        )
    except ValueError as err:
        raise ConfigError(f"key 'grid': {err}")


def _parse_mask(raw: dict, base_dir: Path) -> RegionMask:
    kind = _as_enum(MaskKind, raw.get("kind", "uniform"), "schedule.mask.kind")
    try:
        if kind is MaskKind.UNIFORM:
            return uniform_mask()
        if kind is MaskKind.HORIZONTAL_BANDS:
            return RegionMask(
                kind=kind,
                band_height_cells=_as_int(
                    _require(raw, "band_height_cells", "schedule.mask."),
                    "schedule.mask.band_height_cells",
                ),
                phase_offset_cells=_as_int(
                    raw.get("phase_offset_cells", 0), "schedule.mask.phase_offset_cells"
                ),
            )
        if "ids" in raw:
            from .schedule import cell_map_mask

            return cell_map_mask(raw["ids"])
        path = Path(_require(raw, "path", "schedule.mask."))
        if not path.is_absolute():
            path = base_dir / path
        if not path.exists():
            raise ConfigError(f"key 'schedule.mask.path': file not found: {path}")
        return load_cell_map(path)
    except ValueError as err:
        raise ConfigError(f"key 'schedule.mask': {err}")


def _parse_schedule(raw: dict, base_dir: Path) -> ParameterSchedule:
    if not isinstance(raw, dict):
        raise ConfigError("key 'schedule': expected a mapping")
    mask = _parse_mask(raw.get("mask", {"kind": "uniform"}), base_dir)
    raw_rows = _require(raw, "rows", "schedule.")
    if not isinstance(raw_rows, list) or not raw_rows:
        raise ConfigError("key 'schedule.rows': expected a non-empty list")
    rows = []
    for k, raw_row in enumerate(raw_rows):
        ctx = f"schedule.rows[{k}]"
        if not isinstance(raw_row, dict):
            raise ConfigError(f"key '{ctx}': expected a mapping")
        regions = _require(raw_row, "regions", ctx + ".")
        if not isinstance(regions, dict) or not regions:
            raise ConfigError(f"key '{ctx}.regions': expected a non-empty mapping")
        values = {}
        for region, pair in regions.items():
            rctx = f"{ctx}.regions[{region}]"
            region_id = _as_int(region, rctx)
            if not isinstance(pair, dict):
                raise ConfigError(f"key '{rctx}': expected a mapping with T and h")
            values[region_id] = (
                _as_float(_require(pair, "T", rctx + "."), rctx + ".T"),
                _as_float(_require(pair, "h", rctx + "."), rctx + ".h"),
            )
        try:
            rows.append(
                ScheduleRow(
                    t_begin=_as_float(_require(raw_row, "t_begin", ctx + "."), ctx + ".t_begin"),
                    t_end=_as_float(_require(raw_row, "t_end", ctx + "."), ctx + ".t_end"),
                    values=values,
                )
            )
        except ValueError as err:
            raise ConfigError(f"key '{ctx}': {err}")
    try:
        return ParameterSchedule(mask=mask, rows=tuple(rows))
    except ValueError as err:
        raise ConfigError(f"key 'schedule.rows': {err}")


def _parse_initial(raw: dict, base_dir: Path, default_seed: int) -> InitialCondition:
    if not isinstance(raw, dict):
        raise ConfigError("key 'initial': expected a mapping")
    kind = _as_enum(InitialKind, _require(raw, "kind", "initial."), "initial.kind")
    kwargs: dict[str, Any] = {"kind": kind, "seed": default_seed}
    if "amplitude" in raw:
        kwargs["amplitude"] = _as_float(raw["amplitude"], "initial.amplitude")
    if "seed" in raw:
        kwargs["seed"] = _as_int(raw["seed"], "initial.seed")
    for key in ("side_fraction", "inside", "outside", "thickness_fraction", "coverage_fraction"):
        if key in raw:
            kwargs[key] = _as_float(raw[key], f"initial.{key}")
    if kind is InitialKind.FROM_FILE:
        path = Path(_require(raw, "path", "initial."))
        if not path.is_absolute():
            path = base_dir / path
        if not path.exists():
            raise ConfigError(f"key 'initial.path': file not found: {path}")
        kwargs["path"] = path
    return InitialCondition(**kwargs)


def _parse_splitting(raw: dict) -> SplittingPolicy:
    if not isinstance(raw, dict):
        raise ConfigError("key 'splitting': expected a mapping")
    try:
        return SplittingPolicy(
            safety_factor=_as_float(raw.get("safety_factor", 1.0), "splitting.safety_factor"),
            margin=_as_float(raw.get("margin", 0.0), "splitting.margin"),
            xi_at_zero_t=_as_float(raw.get("xi_at_zero_t", 1.0), "splitting.xi_at_zero_t"),
            mode=_as_enum(XiMode, raw.get("mode", "literal"), "splitting.mode"),
        )
    except ValueError as err:
        raise ConfigError(f"key 'splitting': {err}")


def _parse_recording(raw: dict) -> RecordingSpec:
    if not isinstance(raw, dict):
        raise ConfigError("key 'recording': expected a mapping")
    times = raw.get("snapshot_times", [])
    if not isinstance(times, list):
        raise ConfigError("key 'recording.snapshot_times': expected a list")
    try:
        return RecordingSpec(
            series_stride=_as_int(raw.get("series_stride", 1), "recording.series_stride"),
            snapshot_times=tuple(
                _as_float(t, f"recording.snapshot_times[{k}]") for k, t in enumerate(times)
            ),
        )
    except ValueError as err:
        raise ConfigError(f"key 'recording': {err}")


def config_from_dict(doc: dict, base_dir: Path = Path(".")) -> RunConfig:
    """Validated RunConfig from a parsed document; relative paths resolve
    against base_dir."""
    if not isinstance(doc, dict):
        raise ConfigError("configuration document must be a mapping")
    if "config" in doc and isinstance(doc["config"], dict):
        # run manifests nest the echoed configuration under 'config'
        doc = doc["config"]

    model = _as_enum(Model, _require(doc, "model", ""), "model")
    solver = _as_enum(SolverKind, _require(doc, "solver", ""), "solver")
    grid = _parse_grid(_require(doc, "grid", ""))
    raw_constants = doc.get("constants", {})
    if not isinstance(raw_constants, dict):
        raise ConfigError("key 'constants': expected a mapping")
    try:
        constants = PhysicalConstants(
            gamma=_as_float(_require(raw_constants, "gamma", "constants."), "constants.gamma"),
            mobility=_as_float(raw_constants.get("mobility", 1.0), "constants.mobility"),
        )
    except ValueError as err:
        raise ConfigError(f"key 'constants': {err}")
    dt = _as_positive(_require(doc, "dt", ""), "dt")
    t_final = _as_positive(_require(doc, "t_final", ""), "t_final")
    schedule = _parse_schedule(_require(doc, "schedule", ""), base_dir)
    if schedule.t_end < t_final - 1e-9:
        raise ConfigError(
            f"key 'schedule.rows': coverage ends at t = {schedule.t_end} "
            f"but t_final = {t_final}"
        )
    seed = _as_int(doc.get("seed", 1234), "seed")
    initial = _parse_initial(_require(doc, "initial", ""), base_dir, seed)
    splitting = _parse_splitting(doc.get("splitting", {}))
    recording = _parse_recording(doc.get("recording", {}))
    output_dir = Path(doc.get("output_dir", "run_output"))
    if not output_dir.is_absolute():
        output_dir = base_dir / output_dir
    if solver is SolverKind.IMPLICIT:
        for key, bc in (("grid.bc_y", grid.bc_y), ("grid.bc_x", grid.bc_x)):
            if bc is BoundaryCondition.SYMMETRIC:
                raise ConfigError(
                    f"key '{key}': the implicit solver supports periodic and "
                    "Neumann axes only"
                )
    return RunConfig(
        model=model,
        solver=solver,
        grid=grid,
        constants=constants,
        dt=dt,
        t_final=t_final,
        schedule=schedule,
        initial=initial,
        splitting=splitting,
        recording=recording,
        seed=seed,
        output_dir=output_dir,
    )


def load_config(path: Path) -> RunConfig:
    """Parse and validate a YAML run configuration (or run manifest)."""
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text())
    except yaml.YAMLError as err:
        raise ConfigError(f"cannot parse {path}: {err}")
    return config_from_dict(doc, base_dir=path.parent)


def config_to_dict(cfg: RunConfig) -> dict:
    """Plain-data echo of a resolved configuration (round-trips through
    config_from_dict)."""
    mask = cfg.schedule.mask
    if mask.kind is MaskKind.UNIFORM:
        mask_doc: dict[str, Any] = {"kind": mask.kind.value}
    elif mask.kind is MaskKind.HORIZONTAL_BANDS:
        mask_doc = {
            "kind": mask.kind.value,
            "band_height_cells": mask.band_height_cells,
            "phase_offset_cells": mask.phase_offset_cells,
        }
    elif mask.source_path is not None:
        mask_doc = {"kind": mask.kind.value, "path": str(mask.source_path)}
    else:
        mask_doc = {"kind": mask.kind.value, "ids": mask.cell_ids.tolist()}
    rows_doc = [
        {
            "t_begin": row.t_begin,
            "t_end": row.t_end,
            "regions": {
                region: {"T": pair[0], "h": pair[1]} for region, pair in row.values.items()
            },
        }
        for row in cfg.schedule.rows
    ]
    initial_doc: dict[str, Any] = {"kind": cfg.initial.kind.value}
    if cfg.initial.kind in (InitialKind.UNIFORM_NOISE, InitialKind.REGION_EQUILIBRIUM):
        initial_doc.update(amplitude=cfg.initial.amplitude, seed=cfg.initial.seed)
    elif cfg.initial.kind is InitialKind.SQUARE_INCLUSION:
        initial_doc.update(
            side_fraction=cfg.initial.side_fraction,
            inside=cfg.initial.inside,
            outside=cfg.initial.outside,
        )
    elif cfg.initial.kind is InitialKind.HORIZONTAL_LAYER:
        initial_doc.update(
            thickness_fraction=cfg.initial.thickness_fraction,
            coverage_fraction=cfg.initial.coverage_fraction,
            inside=cfg.initial.inside,
            outside=cfg.initial.outside,
        )
    elif cfg.initial.kind is InitialKind.FROM_FILE:
        initial_doc["path"] = str(cfg.initial.path)
    return {
        "model": cfg.model.value,
        "solver": cfg.solver.value,
        "grid": {
            "n": cfg.grid.n,
            "m": cfg.grid.m,
            "dr": cfg.grid.dr,
            "bc_y": cfg.grid.bc_y.value,
            "bc_x": cfg.grid.bc_x.value,
        },
        "constants": {"gamma": cfg.constants.gamma, "mobility": cfg.constants.mobility},
        "dt": cfg.dt,
        "t_final": cfg.t_final,
        "schedule": {"mask": mask_doc, "rows": rows_doc},
        "initial": initial_doc,
        "splitting": {
            "safety_factor": cfg.splitting.safety_factor,
            "margin": cfg.splitting.margin,
            "xi_at_zero_t": cfg.splitting.xi_at_zero_t,
            "mode": cfg.splitting.mode.value,
        },
        "recording": {
            "series_stride": cfg.recording.series_stride,
            "snapshot_times": list(cfg.recording.snapshot_times),
        },
        "seed": cfg.seed,
        "output_dir": str(cfg.output_dir),
    }
