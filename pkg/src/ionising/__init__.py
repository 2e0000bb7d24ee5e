"""Multi-tone spectral pattern design for programmable Ising couplings on trapped-ion chains.

The package maps a desired pairwise coupling graph J to a signed Rabi-frequency
matrix Omega (ions x tones) driving a shared motional bus, and back:

    crystal   equilibrium chains, transverse modes, Lamb-Dicke factors
    coupling  detuning schedules, mode response tensor, forward map Omega -> J
    graphs    target coupling graphs (chains, periodic lattices, files)
    inverse   minimum-power solve J -> Omega and roundtrip verification
    budget    error estimates and size-scaling studies
    dynamics  small exact Ising dynamics for validating designed couplings
    cli       command line entry points and run artifacts
"""

from .constants import (
    DEFAULT_DELTA_K,
    DEFAULT_ION_MASS,
    DEFAULT_RAMAN_WAVELENGTH,
)
from .coupling import (
    CouplingMatrix,
    DetuningSchedule,
    RabiMatrix,
    ResponseTensor,
    ValidityReport,
    detuning_schedule,
    forward_coupling,
    naive_forward_coupling,
    response_tensor,
    single_tone_coupling,
    validity_check,
)
from .crystal import (
    HarmonicAxial,
    IonCrystal,
    ModeSpectrum,
    QuarticAxial,
    TrapConfig,
    critical_axial_frequency,
    default_axial_frequency,
    default_trap,
    equilibrium_positions,
    lamb_dicke,
    linearity_check,
    transverse_modes,
)
from .dynamics import (
    InteractionTerm,
    SpinState,
    evolve_exact,
    expectation,
    ground_state,
    ising_energy,
    trotter_evolve,
)
from .exceptions import (
    ConvergenceError,
    IonisingError,
    ResonanceError,
    ScheduleCollisionError,
    StabilityError,
)
from .graphs import (
    TargetGraph,
    chain_nn,
    from_file,
    kagome_pbc,
    square_lattice_pbc,
    uniform_full,
)
from .inverse import (
    RoundtripReport,
    SolveConfig,
    SolveResult,
    canonical_column_signs,
    solve_rabi,
    verify_roundtrip,
)
from .budget import (
    ErrorBudget,
    ScalingRow,
    SensitivityResult,
    error_budget,
    phonon_error,
    scaling_study,
    spontaneous_rate,
    trap_sensitivity,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_DELTA_K",
    "DEFAULT_ION_MASS",
    "DEFAULT_RAMAN_WAVELENGTH",
    "ConvergenceError",
    "CouplingMatrix",
    "DetuningSchedule",
    "ErrorBudget",
    "HarmonicAxial",
    "InteractionTerm",
    "IonCrystal",
    "IonisingError",
    "ModeSpectrum",
    "QuarticAxial",
    "RabiMatrix",
    "ResonanceError",
    "ResponseTensor",
    "RoundtripReport",
    "ScalingRow",
    "ScheduleCollisionError",
    "SensitivityResult",
    "SolveConfig",
    "SolveResult",
    "SpinState",
    "StabilityError",
    "TargetGraph",
    "TrapConfig",
    "ValidityReport",
    "canonical_column_signs",
    "chain_nn",
    "critical_axial_frequency",
    "default_axial_frequency",
    "default_trap",
    "detuning_schedule",
    "equilibrium_positions",
    "error_budget",
    "evolve_exact",
    "expectation",
    "forward_coupling",
    "from_file",
    "ground_state",
    "ising_energy",
    "kagome_pbc",
    "lamb_dicke",
    "linearity_check",
    "naive_forward_coupling",
    "phonon_error",
    "response_tensor",
    "scaling_study",
    "single_tone_coupling",
    "solve_rabi",
    "spontaneous_rate",
    "square_lattice_pbc",
    "transverse_modes",
    "trap_sensitivity",
    "trotter_evolve",
    "uniform_full",
    "validity_check",
    "verify_roundtrip",
]
