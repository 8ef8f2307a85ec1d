"""Pulse-controlled emission-line simulator for a detuned two-level emitter.

Three mutually cross-checking spectrum engines (Markovian Heisenberg
analytics, master-equation quantum regression, exact truncated-Fock
propagation), two-photon-interference correlators, and Gaussian-ensemble
averaging, all in dimensionless units with Gamma = 2 by default.
"""

from .ensemble import EnsembleSpec, ensemble_spectrum
from .errors import CapacityExceeded, InvalidParameter, NumericFailure, UnsupportedSequence
from .heisenberg import (
    SpectralKernels,
    SpectrumRequest,
    build_kernels,
    discretization_error_bound,
    free_spectrum,
    gamma0,
    kernel_p,
    kernel_q,
    psi,
    spectrum_heisenberg,
)
from .master import (
    ClosedFormSpectrumParams,
    CorrelationRecord,
    EmitterDensityMatrix,
    apply_ideal_pulse,
    corr_f,
    corr_numeric,
    lorentzian_limit,
    propagate_driven,
    propagate_free,
    rho_excited,
    spectrum_closed_form,
    spectrum_numeric,
)
from .model import (
    EmitterParams,
    EngineTag,
    FrequencyGrid,
    PhotonBathSpec,
    PulseIntervalDecomposition,
    PulseSequence,
    SequenceKind,
    Spectrum,
    decompose_interval,
    discretize_bath,
    make_cp,
    make_pdd,
    make_udd,
)
from .oracle import (
    ExactState,
    FockBasis,
    apply_pulse_exact,
    basis_dimension,
    build_basis,
    build_hamiltonian,
    measure_spectrum,
    propagate_exact,
    run_pulsed_emission,
)
from .tpi import (
    TPIPair,
    g2_numeric,
    g2_single,
    g34,
    g34_no_pulses,
    g34_stationary,
    g34_time_averaged,
    g34_time_averaged_numeric,
)

__all__ = [
    "CapacityExceeded",
    "ClosedFormSpectrumParams",
    "CorrelationRecord",
    "EmitterDensityMatrix",
    "EmitterParams",
    "EngineTag",
    "EnsembleSpec",
    "ExactState",
    "FockBasis",
    "FrequencyGrid",
    "InvalidParameter",
    "NumericFailure",
    "PhotonBathSpec",
    "PulseIntervalDecomposition",
    "PulseSequence",
    "SequenceKind",
    "SpectralKernels",
    "Spectrum",
    "SpectrumRequest",
    "TPIPair",
    "UnsupportedSequence",
    "apply_ideal_pulse",
    "apply_pulse_exact",
    "basis_dimension",
    "build_basis",
    "build_hamiltonian",
    "build_kernels",
    "corr_f",
    "corr_numeric",
    "decompose_interval",
    "discretization_error_bound",
    "discretize_bath",
    "ensemble_spectrum",
    "free_spectrum",
    "g2_numeric",
    "g2_single",
    "g34",
    "g34_no_pulses",
    "g34_stationary",
    "g34_time_averaged",
    "g34_time_averaged_numeric",
    "gamma0",
    "kernel_p",
    "kernel_q",
    "lorentzian_limit",
    "make_cp",
    "make_pdd",
    "make_udd",
    "measure_spectrum",
    "propagate_driven",
    "propagate_exact",
    "propagate_free",
    "psi",
    "rho_excited",
    "run_pulsed_emission",
    "spectrum_closed_form",
    "spectrum_heisenberg",
    "spectrum_numeric",
]

__version__ = "0.1.0"
