"""Finite-temperature Hartree-Fock on a radial grid.

Minimizes E_HF(gamma) + T tr beta(gamma) over fermionic density matrices
(0 <= gamma <= 1) with fractional occupations, checks the computed states
against the analytic linear-model series, and propagates the mean-field
von Neumann equation with exactly-unitary steps.
"""

from .angular import exchange_weights, wigner_3j
from .dynamics import (
    StabilityResult,
    StepSizeError,
    TrajectorySample,
    evolve,
    hspace_distance,
    propagate_step,
    stability_experiment,
)
from .energy import (
    EnergyBreakdown,
    GridMismatchError,
    InequalityAuditReport,
    MeanFieldHamiltonian,
    OperatorCache,
    free_energy,
    hardy_positivity_diagnostic,
    hf_energy,
    inequality_audit,
    linear_free_energy,
    mean_field_hamiltonian,
)
from .entropy import (
    A4Report,
    EntropySpec,
    InvalidExponentError,
    OccupationDomainError,
    make_power_entropy,
    validate_a4,
)
from .grid import (
    DensityMatrix,
    RadialDensity,
    RadialGrid,
    build_grid,
    density_from_gamma,
    dilate,
    hartree_potential,
    kinetic_matrix,
    multipole_kernel,
    nuclear_potential,
    zero_density_matrix,
)
from .linear import (
    HydrogenLevel,
    LinearReport,
    Regime,
    SeriesResult,
    UnboundedModelError,
    UnreachableChargeError,
    guaranteed_existence_qmax,
    hydrogen_level,
    linear_ground_free_energy,
    linear_report,
    mu_of_q,
    q_max_lin,
    q_of_mu,
    regime_classify,
)
from .scf import (
    MinimizerAudit,
    ScfConfig,
    ScfResult,
    SweepResult,
    SweepRow,
    UnboundedRegimeError,
    charge_sweep,
    minimizer_audit,
    occupations_from_levels,
    scf_global,
    scf_minimize,
)

__version__ = "0.1.0"
