"""Excitation transfer through fully connected networks dephased by spin baths."""

from .linalg import SpectralDecomposition, eigh, propagate, propagator
from .network import (
    HBAR_CM_PS,
    KB_CM_PER_K,
    NetworkSpec,
    alpha_over_kbt,
    beta_from_kelvin,
    blocked_fully_connected,
    cm_to_radps,
    fmo_hamiltonian,
    fully_connected,
    radps_to_cm,
)
from .spin_bath import (
    BathSpec,
    SectorWeight,
    degeneracy,
    magnetization_weights,
    partition_function,
    sector_product,
)
from .transport import (
    TransferSeries,
    coherence,
    max_over_window,
    reduced_density_matrix,
    thermal_transfer_probability,
    thermal_transfer_series,
    transfer_probability,
    transfer_series,
)

__version__ = "0.1.0"
