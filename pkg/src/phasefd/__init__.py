"""Finite-difference phase-field solvers on uniform 2-D grids.

Explicit forward-Euler and unconditionally gradient-stable semi-implicit
time integration for the second-order (non-conserved) and fourth-order
(conserved) model equations, with spatially and temporally varying
external parameters, a direct spectral solution of the implicit schemes,
and benchmark harnesses for stability, conservation, and cost scaling.
"""

from .energetics import (
    PhysicalConstants,
    bulk_energy_density,
    bulk_energy_derivative,
    chemical_potential,
    equilibrium_order_parameter,
    total_free_energy,
)
from .errors import (
    ConfigError,
    DegenerateParameterError,
    PhasefdError,
    ScheduleRangeError,
    ShapeMismatchError,
    SingularCoefficientError,
    UnsupportedBoundaryError,
    UnsupportedConfigurationError,
)
from .experiments import (
    InitialCondition,
    InitialKind,
    PerturbationResult,
    RecordingSpec,
    RunResult,
    Scenario,
    SeriesRecord,
    Verdict,
    build_scenario,
    circularity,
    conservation_check,
    gradient_stability_check,
    perturbation_stability_test,
    realize_initial,
    run_simulation,
    scaling_benchmark,
)
from .explicit import (
    StepInputs,
    explicit_ac_step,
    explicit_ch_step,
    explicit_stability_limit,
    is_diverged,
)
from .grid import (
    BoundaryCondition,
    Field,
    Grid,
    create_field,
    l2_difference,
    read_snapshot,
    total_mass,
    write_snapshot,
)
from .implicit import (
    AcCoefficients,
    ChCoefficients,
    assemble_ac_coefficients,
    assemble_ch_coefficients,
    dense_reference_step,
    implicit_step,
    solve_ac_step,
    solve_ch_step,
)
from .models import Model, SolverKind
from .operators import (
    GridBases,
    LaplacianMatrix,
    SpectralBasis,
    TransformDirection,
    apply_biharmonic,
    apply_laplacian,
    build_laplacian_matrix,
    eigendecompose,
    grid_bases,
    spectral_transform,
)
from .schedule import (
    MaskKind,
    ParameterSchedule,
    RegionMask,
    ScheduleRow,
    cell_map_mask,
    evaluate_schedule,
    horizontal_bands_mask,
    load_cell_map,
    uniform_mask,
    uniform_schedule,
)
from .splitting import (
    SplittingPolicy,
    StableSide,
    XiMode,
    phi_max_estimate,
    xi_critical,
    xi_field,
)

__version__ = "0.1.0"
