"""Benchmark scenarios and the experiment harnesses: perturbation
(numerical) stability, gradient (energy) stability, mass conservation,
and the degrees-of-freedom scaling benchmark.
"""

from __future__ import annotations

import math
import statistics
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .energetics import (
    PhysicalConstants,
    equilibrium_order_parameter,
    total_free_energy,
)
from .errors import ConfigError
from .explicit import StepInputs, explicit_ac_step, explicit_ch_step, is_diverged
from .grid import BoundaryCondition, Field, Grid, l2_difference, read_snapshot, total_mass
from .implicit import implicit_step
from .models import Model, SolverKind
from .operators import grid_bases
from .schedule import (
    ParameterSchedule,
    active_row_index,
    evaluate_schedule,
    horizontal_bands_mask,
    two_region_schedule,
    uniform_schedule,
)
from .splitting import SplittingPolicy, xi_field

_TIME_TOL = 1e-9


# -- initial conditions -------------------------------------------------------

class InitialKind(str, Enum):
    SHARP_INTERFACE_X = "sharp_interface_x"
    SQUARE_INCLUSION = "square_inclusion"
    UNIFORM_NOISE = "uniform_noise"
    REGION_EQUILIBRIUM = "region_equilibrium"
    HORIZONTAL_LAYER = "horizontal_layer"
    FROM_FILE = "from_file"


@dataclass(frozen=True)
class InitialCondition:
    """Parameterized initial order-parameter layout.

    SHARP_INTERFACE_X: -1 left of mid-domain, +1 right of it.
    SQUARE_INCLUSION: centered square of ``inside`` in an ``outside`` matrix,
        side = side_fraction of the domain edge.
    UNIFORM_NOISE: i.i.d. uniform values in [-amplitude, +amplitude] from a
        PCG64 generator seeded with ``seed``.
    REGION_EQUILIBRIUM: each schedule-mask region at the bulk-energy
        minimizer of the first schedule row's (T, h), plus uniform noise of
        ``amplitude``; the developed state the varying-parameter stability
        benchmarks start from.
    HORIZONTAL_LAYER: slab of ``inside`` covering the bottom
        thickness_fraction of rows and the left coverage_fraction of
        columns (an exposed edge that retracts under the conserved model).
    FROM_FILE: snapshot CSV with matching shape.
    """

    kind: InitialKind
    amplitude: float = 0.1
    seed: int = 1234
    side_fraction: float = 0.4
    inside: float = 1.0
    outside: float = -1.0
    thickness_fraction: float = 0.125
    coverage_fraction: float = 0.75
    path: Path | None = None


def realize_initial(
    ic: InitialCondition, grid: Grid, schedule: ParameterSchedule | None = None
) -> Field:
    if ic.kind is InitialKind.REGION_EQUILIBRIUM:
        if schedule is None:
            raise ConfigError(
                "region_equilibrium initial condition needs the run's schedule"
            )
        row = schedule.rows[0]
        ids = schedule.mask.region_ids(grid)
        values = np.zeros(grid.shape)
        for region, (T, h) in row.values.items():
            values[ids == region] = equilibrium_order_parameter(T, h)
        rng = np.random.default_rng(ic.seed)
        values += rng.uniform(-ic.amplitude, ic.amplitude, grid.shape)
        return Field(values, grid)
    if ic.kind is InitialKind.SHARP_INTERFACE_X:
        width = grid.m * grid.dr
        values = np.where(grid.x_coords() < 0.5 * width, -1.0, 1.0)
        return Field(np.broadcast_to(values, grid.shape).copy(), grid)
    if ic.kind is InitialKind.SQUARE_INCLUSION:
        width, height = grid.m * grid.dr, grid.n * grid.dr
        half = 0.5 * ic.side_fraction * min(width, height)
        in_x = np.abs(grid.x_coords() - 0.5 * width) < half
        in_y = np.abs(grid.y_coords() - 0.5 * height) < half
        inside = in_y[:, None] & in_x[None, :]
        return Field(np.where(inside, ic.inside, ic.outside), grid)
    if ic.kind is InitialKind.UNIFORM_NOISE:
        rng = np.random.default_rng(ic.seed)
        return Field(rng.uniform(-ic.amplitude, ic.amplitude, grid.shape), grid)
    if ic.kind is InitialKind.HORIZONTAL_LAYER:
        width, height = grid.m * grid.dr, grid.n * grid.dr
        in_y = grid.y_coords() < ic.thickness_fraction * height
        in_x = grid.x_coords() < ic.coverage_fraction * width
        inside = in_y[:, None] & in_x[None, :]
        return Field(np.where(inside, ic.inside, ic.outside), grid)
    if ic.kind is InitialKind.FROM_FILE:
        if ic.path is None:
            raise ConfigError("from_file initial condition needs a path")
        loaded, _meta = read_snapshot(ic.path)
        if loaded.values.shape != grid.shape:
            raise ConfigError(
                f"initial-condition file has shape {loaded.values.shape}, "
                f"grid is {grid.shape}"
            )
        return Field(loaded.values, grid)
    raise ConfigError(f"unknown initial condition kind {ic.kind}")


# -- scenarios ----------------------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    name: str
    grid: Grid
    model: Model
    constants: PhysicalConstants
    schedule: ParameterSchedule
    initial: InitialCondition
    t_final: float

    def __post_init__(self) -> None:
        if not self.t_final > 0:
            raise ValueError(f"t_final must be positive, got {self.t_final}")
        if self.schedule.t_end < self.t_final - _TIME_TOL:
            raise ConfigError(
                f"schedule ends at t = {self.schedule.t_end} but the run "
                f"needs coverage to t_final = {self.t_final}"
            )


# Two-region parameter histories for the varying-parameter benchmarks;
# region 0 holds the first (T, h) pair of each row, region 1 the second.
AC_BANDED_ROWS = [
    (0.00, 0.05, (-4.13, 3.24), (0.49, -11.76)),
    (0.05, 0.10, (0.81, 2.41), (4.18, -5.15)),
    (0.10, 0.15, (-2.51, 4.88), (1.91, -9.85)),
    (0.15, 0.20, (2.23, 8.05), (2.75, -15.23)),
]

CH_BANDED_ROWS = [
    (0.00, 0.05, (4.72, 13.41), (9.44, -22.84)),
    (0.05, 0.10, (2.51, -1.03), (-7.52, -19.08)),
    (0.10, 0.15, (12.65, 29.30), (9.73, -23.46)),
    (0.15, 0.20, (25.37, 54.57), (25.31, -54.69)),
]


def _banded_schedule(rows, n_cells: int, n_bands: int = 5) -> ParameterSchedule:
    mask = horizontal_bands_mask(max(1, n_cells // n_bands))
    return two_region_schedule(mask, rows)


def _unit_square_grid(size: int, bc: BoundaryCondition) -> Grid:
    return Grid(n=size, m=size, dr=1.0 / size, bc_y=bc, bc_x=bc)


def build_scenario(
    name: str,
    *,
    size: int | None = None,
    t_final: float | None = None,
    seed: int | None = None,
) -> Scenario:
    """Benchmark configuration by name, with desk-scale overrides.

    Known names: ac_sharp_interface, ch_square_inclusion, ac_banded,
    ch_banded, ch_layer_retraction.
    """
    seed = 1234 if seed is None else seed
    if name == "ac_sharp_interface":
        n = size or 500
        tf = t_final if t_final is not None else 1.0
        return Scenario(
            name=name,
            grid=_unit_square_grid(n, BoundaryCondition.NEUMANN),
            model=Model.AC,
            constants=PhysicalConstants(gamma=0.01),
            schedule=uniform_schedule(-2.0, 0.0, tf),
            initial=InitialCondition(kind=InitialKind.SHARP_INTERFACE_X),
            t_final=tf,
        )
    if name == "ch_square_inclusion":
        n = size or 100
        tf = t_final if t_final is not None else 1.0
        return Scenario(
            name=name,
            grid=_unit_square_grid(n, BoundaryCondition.PERIODIC),
            model=Model.CH,
            constants=PhysicalConstants(gamma=4e-4),
            schedule=uniform_schedule(-2.0, 0.0, tf),
            initial=InitialCondition(
                kind=InitialKind.SQUARE_INCLUSION,
                side_fraction=0.4,
                inside=1.0,
                outside=-1.0,
            ),
            t_final=tf,
        )
    if name in ("ac_banded", "ch_banded"):
        n = size or 50
        tf = t_final if t_final is not None else 0.20
        rows = AC_BANDED_ROWS if name == "ac_banded" else CH_BANDED_ROWS
        return Scenario(
            name=name,
            grid=_unit_square_grid(n, BoundaryCondition.PERIODIC),
            model=Model.AC if name == "ac_banded" else Model.CH,
            constants=PhysicalConstants(gamma=0.01),
            schedule=_banded_schedule(rows, n),
            initial=InitialCondition(
                kind=InitialKind.REGION_EQUILIBRIUM, amplitude=0.05, seed=seed
            ),
            t_final=tf,
        )
    if name == "ch_layer_retraction":
        n = size or 400
        m = 2 * n
        tf = t_final if t_final is not None else 1.0
        return Scenario(
            name=name,
            grid=Grid(
                n=n,
                m=m,
                dr=1.0 / m,
                bc_y=BoundaryCondition.NEUMANN,
                bc_x=BoundaryCondition.NEUMANN,
            ),
            model=Model.CH,
            constants=PhysicalConstants(gamma=4e-8),
            schedule=uniform_schedule(-2.0, 0.0, tf),
            initial=InitialCondition(kind=InitialKind.HORIZONTAL_LAYER),
            t_final=tf,
        )
    raise ValueError(
        f"unknown scenario {name!r}; known: ac_sharp_interface, "
        "ch_square_inclusion, ac_banded, ch_banded, ch_layer_retraction"
    )


# -- simulation driver ---------------------------------------------------------

@dataclass(frozen=True)
class RecordingSpec:
    series_stride: int = 1
    snapshot_times: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.series_stride < 1:
            raise ValueError("series_stride must be >= 1")
        object.__setattr__(
            self, "snapshot_times", tuple(sorted(float(t) for t in self.snapshot_times))
        )


@dataclass
class SeriesRecord:
    step: int
    time: float
    free_energy: float
    mass: float
    max_abs_phi: float
    l2_perturbation: float | None = None


@dataclass
class RunResult:
    series: list[SeriesRecord]
    snapshots: list[tuple[float, Field]]
    diverged_at: int | None
    final: Field
    n_steps: int


class Verdict(str, Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"


class _Stepper:
    """Per-run stepping closure: schedule lookup with per-row caching,
    splitting-weight recomputation, and the model/solver dispatch."""

    def __init__(
        self,
        scenario: Scenario,
        solver: SolverKind,
        dt: float,
        policy: SplittingPolicy,
    ):
        self.scenario = scenario
        self.solver = solver
        self.dt = dt
        self.policy = policy
        self.bases = grid_bases(scenario.grid) if solver is SolverKind.IMPLICIT else None
        self._row_cache: dict[int, tuple[Field, Field]] = {}

    def params_at(self, t: float) -> tuple[Field, Field]:
        key = active_row_index(self.scenario.schedule, t)
        cached = self._row_cache.get(key)
        if cached is None:
            cached = evaluate_schedule(self.scenario.schedule, t, self.scenario.grid)
            self._row_cache[key] = cached
        return cached

    def advance(self, phi: Field, t_target: float) -> Field:
        T, h = self.params_at(t_target)
        s = self.scenario
        if self.solver is SolverKind.EXPLICIT:
            inputs = StepInputs(phi=phi, T=T, h=h, constants=s.constants, dt=self.dt)
            if s.model is Model.AC:
                return explicit_ac_step(inputs)
            return explicit_ch_step(inputs)
        xi = xi_field(T, phi, self.policy)
        return implicit_step(
            s.model, phi, T, h, xi, s.constants, self.dt, bases=self.bases
        )


def _step_count(t_final: float, dt: float) -> int:
    return max(1, math.ceil(t_final / dt - _TIME_TOL))


def run_simulation(
    scenario: Scenario,
    solver: SolverKind,
    dt: float,
    policy: SplittingPolicy | None = None,
    record: RecordingSpec | None = None,
) -> RunResult:
    """Advance the scenario from t = 0 to t_final in fixed steps.

    The schedule is sampled at each step's (clamped) target time; energy
    and mass are recorded every ``series_stride`` steps plus the first and
    last.  Divergence stops the run early and sets ``diverged_at``.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    policy = policy if policy is not None else SplittingPolicy()
    record = record if record is not None else RecordingSpec()
    stepper = _Stepper(scenario, solver, dt, policy)
    phi = realize_initial(scenario.initial, scenario.grid, scenario.schedule)
    n_steps = _step_count(scenario.t_final, dt)
    t_final = scenario.t_final

    series: list[SeriesRecord] = []
    snapshots: list[tuple[float, Field]] = []
    pending_snaps = list(record.snapshot_times)

    def record_state(step: int, t: float, state: Field) -> None:
        T, h = stepper.params_at(min(t, t_final))
        with np.errstate(over="ignore", invalid="ignore"):
            energy = total_free_energy(state, T, h, scenario.constants)
        series.append(
            SeriesRecord(
                step=step,
                time=t,
                free_energy=energy,
                mass=total_mass(state),
                max_abs_phi=state.max_abs(),
            )
        )

    def take_snapshots(t: float, state: Field) -> None:
        while pending_snaps and t >= pending_snaps[0] - _TIME_TOL:
            snapshots.append((t, state))
            pending_snaps.pop(0)

    record_state(0, 0.0, phi)
    take_snapshots(0.0, phi)
    diverged_at = None
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, n_steps + 1):
            t_next = k * dt
            phi = stepper.advance(phi, min(t_next, t_final))
            if is_diverged(phi.values):
                diverged_at = k
                record_state(k, t_next, phi)
                break
            if k % record.series_stride == 0 or k == n_steps:
                record_state(k, t_next, phi)
            take_snapshots(t_next, phi)
    return RunResult(
        series=series,
        snapshots=snapshots,
        diverged_at=diverged_at,
        final=phi,
        n_steps=n_steps,
    )


# -- stability / conservation checks -------------------------------------------

GROWTH_THRESHOLD = 1.5
BLOWUP_THRESHOLD = 1e3


@dataclass
class PerturbationResult:
    norms: list[tuple[int, float, float]]
    verdict: Verdict
    base: RunResult
    max_growth: float


def perturbation_stability_test(
    scenario: Scenario,
    solver: SolverKind,
    dt: float,
    magnitude: float,
    seed: int,
    policy: SplittingPolicy | None = None,
    record: RecordingSpec | None = None,
    growth_threshold: float = GROWTH_THRESHOLD,
    blowup_threshold: float = BLOWUP_THRESHOLD,
) -> PerturbationResult:
    """Twin-trajectory stability probe.

    Runs the scenario with and without a per-node uniform random
    perturbation of the initial state and tracks the l2 difference.  The
    verdict is STABLE when the difference never exceeds
    growth_threshold * its initial value and neither trajectory diverges;
    any divergence or growth beyond the threshold is UNSTABLE.  Norms
    beyond blowup_threshold * initial end the run early.
    """
    if magnitude < 0:
        raise ValueError(f"magnitude must be non-negative, got {magnitude}")
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    policy = policy if policy is not None else SplittingPolicy()
    record = record if record is not None else RecordingSpec()
    stepper = _Stepper(scenario, solver, dt, policy)
    grid = scenario.grid
    base = realize_initial(scenario.initial, grid, scenario.schedule)
    rng = np.random.default_rng(seed)
    perturbed = base.with_values(
        base.values + rng.uniform(-magnitude, magnitude, grid.shape)
    )
    n_steps = _step_count(scenario.t_final, dt)
    t_final = scenario.t_final

    series: list[SeriesRecord] = []
    norms: list[tuple[int, float, float]] = []

    def record_state(step: int, t: float, state: Field, norm: float) -> None:
        T, h = stepper.params_at(min(t, t_final))
        with np.errstate(over="ignore", invalid="ignore"):
            energy = total_free_energy(state, T, h, scenario.constants)
        series.append(
            SeriesRecord(
                step=step,
                time=t,
                free_energy=energy,
                mass=total_mass(state),
                max_abs_phi=state.max_abs(),
                l2_perturbation=norm,
            )
        )
        norms.append((step, t, norm))

    initial_norm = l2_difference(base, perturbed)
    record_state(0, 0.0, base, initial_norm)
    diverged_at = None
    max_norm = initial_norm
    blown_up = False
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, n_steps + 1):
            t_next = k * dt
            t_target = min(t_next, t_final)
            base = stepper.advance(base, t_target)
            perturbed = stepper.advance(perturbed, t_target)
            if is_diverged(base.values) or is_diverged(perturbed.values):
                diverged_at = k
                record_state(k, t_next, base, float("inf"))
                break
            if k % record.series_stride == 0 or k == n_steps:
                norm = l2_difference(base, perturbed)
                max_norm = max(max_norm, norm)
                record_state(k, t_next, base, norm)
                if norm > blowup_threshold * initial_norm and initial_norm > 0.0:
                    blown_up = True
                    break

    if diverged_at is not None or blown_up:
        verdict = Verdict.UNSTABLE
        max_growth = float("inf") if diverged_at is not None else max_norm / initial_norm
    elif initial_norm == 0.0:
        verdict = Verdict.STABLE if max_norm == 0.0 else Verdict.UNSTABLE
        max_growth = 0.0 if max_norm == 0.0 else float("inf")
    else:
        max_growth = max_norm / initial_norm
        verdict = (
            Verdict.STABLE if max_norm <= growth_threshold * initial_norm else Verdict.UNSTABLE
        )
    base_result = RunResult(
        series=series,
        snapshots=[],
        diverged_at=diverged_at,
        final=base,
        n_steps=n_steps,
    )
    return PerturbationResult(
        norms=norms, verdict=verdict, base=base_result, max_growth=max_growth
    )


def gradient_stability_check(energy_series: Sequence[float], rel_tol: float = 1e-9) -> bool:
    """True iff the free energy never increases by more than rel_tol * |F|."""
    if len(energy_series) == 0:
        raise ValueError("energy series is empty")
    for prev, nxt in zip(energy_series, energy_series[1:]):
        if not nxt <= prev + rel_tol * abs(prev):
            return False
    return True


def conservation_check(mass_series: Sequence[float]) -> float:
    """Max relative drift of the mass series from its initial value.

    Falls back to absolute drift when the initial mass is zero.
    """
    if len(mass_series) == 0:
        raise ValueError("mass series is empty")
    m0 = mass_series[0]
    drift = max(abs(m - m0) for m in mass_series)
    return drift / abs(m0) if m0 != 0.0 else drift


# -- scaling benchmark ----------------------------------------------------------

@dataclass
class ScalingRow:
    size: int
    dof: int
    seconds_per_step: float


@dataclass
class ScalingResult:
    rows: list[ScalingRow]
    exponent: float | None
    note: str = ""


def _default_dt_rule(model: Model, solver: SolverKind, gamma: float) -> Callable[[int], float]:
    from .explicit import explicit_stability_limit

    def rule(n: int) -> float:
        if solver is SolverKind.EXPLICIT:
            return 0.4 * explicit_stability_limit(model, gamma, 1.0 / n)
        return 0.01

    return rule


def scaling_benchmark(
    model: Model,
    solver: SolverKind,
    sizes: Sequence[int],
    steps_per_size: int = 12,
    dt_rule: Callable[[int], float] | None = None,
    repeats: int = 3,
    gamma: float = 0.01,
) -> ScalingResult:
    """Median per-step wall time vs degrees of freedom, with a log-log fit.

    Only the stepping loop is timed: bases, operators, and parameter
    fields are prepared beforehand.  BLAS thread pools are pinned to one
    thread during timing when threadpoolctl is available, so the fitted
    exponent reflects arithmetic cost rather than thread scheduling.
    """
    sizes = list(sizes)
    if sorted(sizes) != sizes:
        raise ValueError("sizes must be ascending")
    if dt_rule is None:
        dt_rule = _default_dt_rule(model, solver, gamma)
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:  # pragma: no cover - always installed in practice
        import contextlib

        def threadpool_limits(limits):
            return contextlib.nullcontext()

    rows: list[ScalingRow] = []
    for n in sizes:
        scenario = Scenario(
            name=f"bench_{n}",
            grid=_unit_square_grid(n, BoundaryCondition.PERIODIC),
            model=model,
            constants=PhysicalConstants(gamma=gamma),
            schedule=uniform_schedule(-2.0, 0.0, 1e9),
            initial=InitialCondition(kind=InitialKind.UNIFORM_NOISE, amplitude=0.05, seed=7),
            t_final=1e9,
        )
        dt = dt_rule(n)
        stepper = _Stepper(scenario, solver, dt, SplittingPolicy())
        phi = realize_initial(scenario.initial, scenario.grid, scenario.schedule)
        t_target = scenario.t_final  # constant parameters: any covered time
        with threadpool_limits(limits=1):
            for _ in range(2):  # warmup: builds cached operators and bases
                phi = stepper.advance(phi, t_target)
            samples = []
            for _ in range(repeats):
                start = time.perf_counter()
                for _ in range(steps_per_size):
                    phi = stepper.advance(phi, t_target)
                elapsed = time.perf_counter() - start
                samples.append(elapsed / steps_per_size)
        rows.append(
            ScalingRow(size=n, dof=n * n, seconds_per_step=statistics.median(samples))
        )

    if len(rows) < 2:
        return ScalingResult(
            rows=rows, exponent=None, note="need at least two sizes to fit an exponent"
        )
    log_dof = np.log([r.dof for r in rows])
    log_t = np.log([r.seconds_per_step for r in rows])
    slope, _intercept = np.polyfit(log_dof, log_t, 1)
    return ScalingResult(rows=rows, exponent=float(slope))


# -- geometry metric -------------------------------------------------------------

def circularity(f: Field, level: float = 0.0) -> float:
    """4 pi A / P^2 of the longest level contour (1.0 for a circle).

    Contours are extracted by marching squares; area is the shoelace sum
    and perimeter the polyline length, both in physical units.
    """
    from skimage import measure

    contours = measure.find_contours(f.values, level)
    if not contours:
        raise ValueError(f"no contour of {level} found in field")

    def polyline_length(c: np.ndarray) -> float:
        seg = np.diff(c, axis=0)
        return float(np.sum(np.hypot(seg[:, 0], seg[:, 1])))

    contour = max(contours, key=polyline_length) * f.grid.dr
    perimeter = polyline_length(contour)
    y, x = contour[:, 0], contour[:, 1]
    area = 0.5 * abs(float(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1])))
    if perimeter == 0.0:
        raise ValueError("degenerate contour")
    return 4.0 * math.pi * area / (perimeter * perimeter)
