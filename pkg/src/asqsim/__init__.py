"""Simulation and analysis toolkit for two supercurrent-coupled Andreev spin qubits."""

__version__ = "0.1.0"

from .constants import CONSTANTS, PhysicalConstants
from .core import (
    CprRangeError,
    CurrentPhaseRelation,
    DeviceParams,
    FluxPoint,
    SpinConfig,
    SPIN_CONFIGS,
    cpr_derivative,
    cpr_eval,
    inductance_from_energy,
    l_asq,
    reduced_phase,
    spin_current,
)
from .coupling import (
    BranchEnergies,
    CouplingResult,
    branch_energies,
    j_analytic,
    j_current_product,
    j_current_product_from_params,
    j_flux_sweep,
    j_numeric,
    total_potential,
)
from .transmon import (
    ChargeBasisConfig,
    ConvergenceError,
    TransmonSpectrum,
    ejc_from_ft,
    transmon_spectrum,
)
from .lindblad import (
    DecayRates,
    DegenerateSteadyStateError,
    DriveConfig,
    ReadoutModel,
    SpectroscopyMap,
    SteadyStateSolution,
    readout_signal,
    rotating_hamiltonian,
    spectroscopy_map,
    steady_state,
)
from .fitting import (
    DegenerateFitError,
    ExtractionError,
    FitResult,
    PeakDecision,
    background_divide,
    extract_j,
    fit_cpr,
    fit_decaying_oscillation,
    fit_double_gaussian,
    fit_resonator,
    fit_single_gaussian,
    fit_t1,
    flux_axis_map,
    g_factor_and_dispersion,
    median_subtract,
    nlls_fit,
    snr_and_fidelity,
)
