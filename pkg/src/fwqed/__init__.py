"""Waveguide QED with a periodically driven Su-Schrieffer-Heeger bath."""

__version__ = "0.1.0"

from .dynamics import EmitterConfig, SingleExcitationState, evolve, exchange_trajectory
from .effective import (
    DEFAULT_CONVENTION,
    VERBATIM,
    TableConvention,
    coupling_table,
    effective_bloch,
    f_table,
    rwa_quasienergies,
    winding_0,
    winding_pi,
)
from .errors import FwqedError, GapClosedError, NonHermitianError, NormDriftError, ResolutionError
from .floquet import (
    DrivenHamiltonian,
    find_edge_states,
    floquet_modes,
    propagate_period,
    quasienergies_bloch,
    quasienergy_spectrum_obc,
)
from .interactions import (
    dipole_coupling,
    dipole_coupling_detuned,
    effective_two_emitter_dynamics,
    master_equation_rates,
)
from .lattice import Boundary, LatticeParams, Sublattice
from .spectral import (
    effective_self_energy,
    floquet_bound_state,
    static_bound_state,
    static_self_energy,
    time_averaged_bound_state,
)

__all__ = [
    "Boundary",
    "DEFAULT_CONVENTION",
    "DrivenHamiltonian",
    "EmitterConfig",
    "FwqedError",
    "GapClosedError",
    "LatticeParams",
    "NonHermitianError",
    "NormDriftError",
    "ResolutionError",
    "SingleExcitationState",
    "Sublattice",
    "TableConvention",
    "VERBATIM",
    "coupling_table",
    "dipole_coupling",
    "dipole_coupling_detuned",
    "effective_bloch",
    "effective_self_energy",
    "effective_two_emitter_dynamics",
    "evolve",
    "exchange_trajectory",
    "f_table",
    "find_edge_states",
    "floquet_bound_state",
    "floquet_modes",
    "master_equation_rates",
    "propagate_period",
    "quasienergies_bloch",
    "quasienergy_spectrum_obc",
    "rwa_quasienergies",
    "static_bound_state",
    "static_self_energy",
    "time_averaged_bound_state",
    "winding_0",
    "winding_pi",
]
