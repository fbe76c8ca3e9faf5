"""Desk-scale simulator of a junction / resonator / spin-ensemble memory.

Layers, lowest first:

* hilbert: composite-space bookkeeping, states, operators.
* device: electrical parameters -> model frequencies and couplings.
* hamiltonian: model Hamiltonians in their rotating frames.
* lindblad: open-system evolution, RK4 route plus exact oracle.
* protocols: write/read protocols and the dispersive validation.
* scenarios / config / cli: reproducible runs behind the command line.
"""

from .device import (
    CbjjParams,
    DerivedFrequencies,
    NveParams,
    TlrParams,
    derive_dispersive,
    derive_resonant,
    dispersive_point,
    resonant_point,
)
from .hamiltonian import ModelParams
from .hilbert import DensityMatrix, Ket, Operator, SpaceLayout, fidelity
from .lindblad import (
    DecoherenceRates,
    EvolutionConfig,
    IntegrationError,
    Trajectory,
    evolve_exact,
    evolve_rk4,
)
from .protocols import (
    DispersiveReport,
    TransferResult,
    TransferSpec,
    WStateResult,
    WStateSpec,
    di_transfer,
    protocol_times,
    ri_transfer,
    validate_dispersive,
    w_state_prepare,
)

__version__ = "0.1.0"

__all__ = [
    "CbjjParams", "TlrParams", "NveParams", "DerivedFrequencies",
    "resonant_point", "dispersive_point", "derive_resonant",
    "derive_dispersive", "ModelParams", "SpaceLayout", "Ket",
    "DensityMatrix", "Operator", "fidelity", "DecoherenceRates",
    "EvolutionConfig", "Trajectory", "IntegrationError", "evolve_rk4",
    "evolve_exact", "TransferSpec", "TransferResult", "WStateSpec",
    "WStateResult", "DispersiveReport", "ri_transfer", "di_transfer",
    "w_state_prepare", "protocol_times", "validate_dispersive",
    "__version__",
]
