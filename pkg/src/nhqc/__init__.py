"""Non-Hermitian quasicrystal ring lattices: spectra, winding numbers, transport."""

from .model import (
    AlphaMode,
    LatticeParams,
    PotentialSpec,
    WalkParams,
    build_hamiltonian,
    build_walk_operator,
    fibonacci_approximant,
    potential_values,
)
from .spectral import (
    ComplexSpectrum,
    QuasiEnergySpectrum,
    StateLabel,
    classify_states,
    eigendecompose,
    ipr,
    log_det,
    quasienergies,
)
from .topology import (
    LoopParameter,
    WindingRequest,
    WindingResult,
    loop_centroids,
    winding_map,
    winding_number,
)
from .dynamics import (
    SpreadingRecord,
    TransportFit,
    TransportVerdict,
    WalkLoop,
    WaveState,
    evolve_ct,
    evolve_qw,
    second_moment,
    transport_classifier,
)
from .errors import ConfigError, EigensolverError, NhqcError, NumericalError, WindingError

__version__ = "0.1.0"

__all__ = [
    "AlphaMode",
    "ComplexSpectrum",
    "ConfigError",
    "EigensolverError",
    "LatticeParams",
    "LoopParameter",
    "NhqcError",
    "NumericalError",
    "PotentialSpec",
    "QuasiEnergySpectrum",
    "SpreadingRecord",
    "StateLabel",
    "TransportFit",
    "TransportVerdict",
    "WalkLoop",
    "WalkParams",
    "WaveState",
    "WindingError",
    "WindingRequest",
    "WindingResult",
    "build_hamiltonian",
    "build_walk_operator",
    "classify_states",
    "eigendecompose",
    "evolve_ct",
    "evolve_qw",
    "fibonacci_approximant",
    "ipr",
    "log_det",
    "loop_centroids",
    "potential_values",
    "quasienergies",
    "second_moment",
    "transport_classifier",
    "winding_map",
    "winding_number",
    "__version__",
]
