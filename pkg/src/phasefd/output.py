"""Deterministic result serialization: series CSV, field snapshots, and
the run manifest.

All numbers are written with 17 significant digits so they re-parse to
bit-identical doubles.
"""

from __future__ import annotations

from pathlib import Path

import yaml

from .config import RunConfig, config_to_dict
from .experiments import (
    RunResult,
    conservation_check,
    gradient_stability_check,
)
from .grid import write_snapshot

SERIES_HEADER = "step,time,free_energy,mass,l2_perturbation,max_abs_phi"


def _fmt(x: float | None) -> str:
    return "" if x is None else f"{x:.17g}"


def write_series_csv(result: RunResult, path: Path) -> None:
    lines = [SERIES_HEADER]
    for rec in result.series:
        lines.append(
            f"{rec.step},{_fmt(rec.time)},{_fmt(rec.free_energy)},"
            f"{_fmt(rec.mass)},{_fmt(rec.l2_perturbation)},{_fmt(rec.max_abs_phi)}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def read_series_csv(path: Path) -> list[dict]:
    rows = []
    lines = Path(path).read_text().strip().splitlines()
    header = lines[0].split(",")
    for line in lines[1:]:
        parts = line.split(",")
        row: dict = {}
        for key, raw in zip(header, parts):
            if key == "step":
                row[key] = int(raw)
            else:
                row[key] = float(raw) if raw else None
        rows.append(row)
    return rows


def _snapshot_name(time: float) -> str:
    return f"snapshot_t{time:.6g}.csv"


def write_outputs(
    result: RunResult,
    config: RunConfig,
    force: bool = False,
    extra_results: dict | None = None,
) -> list[Path]:
    """Write series.csv, snapshot files, and manifest.yaml to the run dir.

    The output directory is never reused unless force is set.  The
    manifest echoes the fully resolved configuration (loadable again by
    load_config) plus verdict-style summary values.
    """
    out = Path(config.output_dir)
    if out.exists() and any(out.iterdir()) and not force:
        raise FileExistsError(
            f"output directory {out} already exists; pass force to replace"
        )
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    series_path = out / "series.csv"
    write_series_csv(result, series_path)
    written.append(series_path)

    snapshot_names = []
    for time, field in result.snapshots:
        snap_path = out / _snapshot_name(time)
        write_snapshot(field, snap_path, time=time, step=round(time / config.dt))
        snapshot_names.append(snap_path.name)
        written.append(snap_path)

    energies = [rec.free_energy for rec in result.series]
    masses = [rec.mass for rec in result.series]
    results_doc = {
        "n_steps": result.n_steps,
        "diverged_at": result.diverged_at,
        "final_time": result.series[-1].time if result.series else None,
        "gradient_stable": bool(gradient_stability_check(energies)),
        "mass_drift": float(conservation_check(masses)),
        "series_file": series_path.name,
        "snapshots": snapshot_names,
    }
    if extra_results:
        results_doc.update(extra_results)
    manifest = {"config": config_to_dict(config), "results": results_doc}
    manifest_path = out / "manifest.yaml"
    manifest_path.write_text(yaml.safe_dump(manifest, sort_keys=False))
    written.append(manifest_path)
    return written
