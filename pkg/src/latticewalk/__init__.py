"""Continuous-time quantum and classical walks on 2D lattices (rectangle, cylinder, torus)."""

__version__ = "0.1.0"

from .lattice import (  # noqa: E402
    OPEN,
    PERIODIC,
    BoundaryCondition,
    LatticeError,
    LatticeSpec,
    NodeIndex,
    build_hamiltonian,
    functionality,
)
from .spectral import (  # noqa: E402
    ClusteringError,
    SpectralBasis,
    build_basis,
    chain_eigenvector,
    chain_modes,
    degeneracy_classes,
    numerical_diagonalize,
)
from .dynamics import (  # noqa: E402
    classical_avg_return,
    classical_probabilities,
    lower_bound_mu,
    quantum_amplitudes,
    quantum_avg_return,
    return_curve,
)
from .limiting import (  # noqa: E402
    asymmetry_scan,
    limiting_distribution,
    limiting_distribution_factorized,
    marginals,
    time_averaged_distribution,
)
from .continuum import bessel_j, continuum_probability  # noqa: E402

__all__ = [
    "OPEN", "PERIODIC", "BoundaryCondition", "LatticeError", "LatticeSpec", "NodeIndex",
    "build_hamiltonian", "functionality",
    "ClusteringError", "SpectralBasis", "build_basis", "chain_eigenvector", "chain_modes",
    "degeneracy_classes", "numerical_diagonalize",
    "classical_avg_return", "classical_probabilities", "lower_bound_mu", "quantum_amplitudes",
    "quantum_avg_return", "return_curve",
    "asymmetry_scan", "limiting_distribution", "limiting_distribution_factorized", "marginals",
    "time_averaged_distribution",
    "bessel_j", "continuum_probability",
]
