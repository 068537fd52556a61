"""Stochastic unraveling of positive (not necessarily completely positive)
quantum master equations.

Quantum-state-diffusion trajectories whose noise channels come from the
spectral decomposition of a state-dependent transition rate operator, so
that semigroups with negative rates (positive but not CP) can be unraveled;
includes a deterministic master-equation oracle, positivity diagnostics,
and the built-in qubit / exciton-dimer models.
"""
from ._backend import backend_name
from .ensemble import (
    ComparisonReport,
    EnsembleStats,
    compare_to_oracle,
    observable_names,
    run_ensemble,
    write_ensemble_csv,
)
from .errors import (
    AllTrajectoriesAborted,
    ConfigError,
    DimensionCapExceeded,
    DimensionMismatch,
    GridMismatch,
    InvalidDimension,
    NegativeRate,
    NonHermitianInput,
    NonHermiticityPreserving,
    NonTracePreserving,
    PositivityViolation,
    UnnormalizedState,
    UnravelError,
)
from .generators import (
    DiagonalGenerator,
    NonDiagonalGenerator,
    RedfieldTensor,
    TimeDependentGenerator,
    apply_generator,
    as_diagonal,
    canonicalize,
    generator_to_redfield,
    hamiltonian_coefficients,
    load_generator_file,
    nondiagonal_to_diagonal,
    redfield_to_diagonal,
    redfield_to_nondiagonal,
    save_generator_file,
)
from .linalg import (
    OperatorBasis,
    build_generalized_gellmann_basis,
    hermitian_eigendecomposition,
    matrix_exponential,
)
from .master_equation import min_eigenvalues, qubit_closed_form, solve_me
from .models import ModelPreset, dimer_model, get_preset, preset_names, qubit_model
from .positivity import (
    GtroDecomposition,
    PositivityVerdict,
    build_gtro,
    check_cp_via_ancilla,
    check_kossakowski,
    check_p_divisibility,
    decompose_gtro,
)
from .sde import (
    SdeConfig,
    Trajectory,
    WienerIncrementBlock,
    drift_operator,
    mix_seed,
    noise_operators_gtro,
    noise_operators_standard,
    run_trajectory,
    sde_step,
    wiener_increments,
)

__version__ = "0.1.0"
