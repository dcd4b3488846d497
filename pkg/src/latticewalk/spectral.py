"""Analytic eigen-decomposition of the separable lattice Hamiltonian.

Every lattice Hamiltonian here is ``H = gamma (H_x (x) 1 + 1 (x) H_y)`` with
``H_x``, ``H_y`` ring (periodic) or path (open) Laplacians, so the modes are
tensor products of chain modes:

* periodic chain of length ``M``: ``theta = 2 pi m / M`` and
  ``psi(j) = exp(-i theta j) / sqrt(M)``;
* open chain of length ``M``: ``theta = pi m / M`` and
  ``psi(j) ~ cos(theta (j - 1/2))``, normalized.

Both have eigenvalue ``2 - 2 cos(theta)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .lattice import (
    BoundaryCondition,
    LatticeSpec,
    as_node,
    chain_laplacian,
    check_extent,
)

DEFAULT_TOL = 1e-9
# build-time check of the chain eigenvectors against the chain Laplacian
_CHAIN_CHECK = 1e-10


class ClusteringError(ArithmeticError):
    """Eigenvalues too close to separate unambiguously into degeneracy classes."""


@dataclass(frozen=True)
class ChainMode:
    theta: float
    eigenvalue: float
    bc: BoundaryCondition
    m: int
    extent: int


@dataclass(frozen=True)
class Mode:
    mode_x: ChainMode
    mode_y: ChainMode

    @property
    def eigenvalue(self) -> float:
        """Laplacian eigenvalue ``4 - 2 cos(theta_x) - 2 cos(theta_y)`` (without gamma)."""
        return self.mode_x.eigenvalue + self.mode_y.eigenvalue


def chain_modes(extent: int, bc, sort: bool = False) -> list[ChainMode]:
    bc = BoundaryCondition.parse(bc)
    check_extent(extent, bc)
    scale = 2.0 if bc.is_periodic else 1.0
    modes = []
    for m in range(extent):
        theta = scale * np.pi * m / extent
        # m = 0 is set explicitly so the zero mode is exactly 0
        lam = 0.0 if m == 0 else 2.0 - 2.0 * np.cos(theta)
        modes.append(ChainMode(theta, lam, bc, m, extent))
    if sort:
        modes.sort(key=lambda c: (c.eigenvalue, c.m))
    return modes


def chain_eigenvector(mode: ChainMode, j: int) -> complex:
    """Component of the chain eigenvector at site ``j`` (1-based)."""
    if not 1 <= j <= mode.extent:
        raise IndexError(f"site {j} outside chain of length {mode.extent}")
    return complex(_chain_vectors(mode.extent, mode.bc)[j - 1, mode.m])


def _chain_vectors(extent: int, bc: BoundaryCondition) -> np.ndarray:
    j = np.arange(1, extent + 1)[:, None]
    m = np.arange(extent)[None, :]
    if bc.is_periodic:
        return np.exp(-1j * (2.0 * np.pi * m / extent) * j) / np.sqrt(extent)
    V = np.cos((np.pi * m / extent) * (j - 0.5))
    V *= np.sqrt(2.0 / extent)
    V[:, 0] = 1.0 / np.sqrt(extent)
    return V.astype(np.complex128)


@dataclass(frozen=True)
class ChainBasis:
    """Eigenvalues (Laplacian units) and eigenvectors of one chain; columns indexed by ``m``."""

    extent: int
    bc: BoundaryCondition
    eigenvalues: np.ndarray
    vectors: np.ndarray

    @classmethod
    def build(cls, extent: int, bc) -> "ChainBasis":
        bc = BoundaryCondition.parse(bc)
        lam = np.array([c.eigenvalue for c in chain_modes(extent, bc)])
        V = _chain_vectors(extent, bc)
        resid = np.abs(chain_laplacian(extent, bc) @ V - V * lam[None, :]).max()
        if resid > _CHAIN_CHECK:
            raise ArithmeticError(f"chain eigenvectors fail the eigen-equation (residual {resid:.3g})")
        lam.flags.writeable = False
        V.flags.writeable = False
        return cls(extent, bc, lam, V)

    def propagator(self, t: float, gamma: float = 1.0, quantum: bool = True) -> np.ndarray:
        """``exp(-i gamma H t)`` (quantum) or ``exp(-gamma H t)`` (classical) for the chain."""
        rate = -1j * gamma * t if quantum else -gamma * t
        return (self.vectors * np.exp(rate * self.eigenvalues)[None, :]) @ self.vectors.conj().T


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """Complete set of ``M*N`` separable modes, lexicographic in ``(m_x, m_y)``.

    ``eigenvalues`` already include the rate ``gamma``; ``Mode.eigenvalue``
    does not.
    """

    spec: LatticeSpec
    chain_x: ChainBasis
    chain_y: ChainBasis
    tol: float = DEFAULT_TOL
    _classes: tuple = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.spec.size

    @cached_property
    def laplacian_eigenvalues(self) -> np.ndarray:
        return (self.chain_x.eigenvalues[:, None] + self.chain_y.eigenvalues[None, :]).ravel()

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return self.spec.gamma * self.laplacian_eigenvalues

    @cached_property
    def vectors(self) -> np.ndarray:
        """Dense eigenvector matrix, column ``n`` is mode ``n``, rows are flat node indices."""
        return np.kron(self.chain_x.vectors, self.chain_y.vectors)

    def mode_index(self, mx: int, my: int) -> int:
        return mx * self.spec.N + my

    def mode(self, n: int) -> Mode:
        mx, my = divmod(n, self.spec.N)
        return Mode(_chain_mode(self.chain_x, mx), _chain_mode(self.chain_y, my))

    @property
    def modes(self) -> list[Mode]:
        return [self.mode(n) for n in range(self.size)]

    def eigenvector(self, n: int, node) -> complex:
        node = as_node(self.spec, node)
        mx, my = divmod(n, self.spec.N)
        return complex(self.chain_x.vectors[node.jx - 1, mx] * self.chain_y.vectors[node.jy - 1, my])

    @property
    def classes(self) -> "DegeneracyClasses":
        if self._classes is None:
            object.__setattr__(self, "_classes", degeneracy_classes(self, self.tol))
        return self._classes


def _chain_mode(chain: ChainBasis, m: int) -> ChainMode:
    scale = 2.0 if chain.bc.is_periodic else 1.0
    return ChainMode(scale * np.pi * m / chain.extent, float(chain.eigenvalues[m]), chain.bc, m, chain.extent)


def build_basis(spec: LatticeSpec, tol: float = DEFAULT_TOL) -> SpectralBasis:
    if tol <= 0:
        raise ValueError("tol must be positive")
    return SpectralBasis(spec, ChainBasis.build(spec.M, spec.bc_x), ChainBasis.build(spec.N, spec.bc_y), tol)


@dataclass(frozen=True)
class DegeneracyClasses:
    """Partition of mode indices into groups of equal eigenvalue.

    ``order`` holds mode indices sorted by eigenvalue; class ``c`` is
    ``order[starts[c]:starts[c + 1]]``. ``class_id[n]`` is the class of mode
    ``n``; classes are numbered by increasing eigenvalue.
    """

    order: np.ndarray
    starts: np.ndarray
    class_id: np.ndarray
    values: np.ndarray
    tol: float
    min_gap: float

    def __len__(self) -> int:
        return len(self.starts)

    def __iter__(self):
        return iter(np.split(self.order, self.starts[1:]))

    def members(self, c: int) -> np.ndarray:
        hi = self.starts[c + 1] if c + 1 < len(self.starts) else len(self.order)
        return self.order[self.starts[c]:hi]


def cluster_eigenvalues(values: np.ndarray, tol: float = DEFAULT_TOL) -> DegeneracyClasses:
    """Group values chained by gaps ``< tol``; refuse if any split gap is ``< 10 tol``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    values = np.asarray(values, dtype=float)
    order = np.argsort(values, kind="stable")
    gaps = np.diff(values[order])
    split = gaps >= tol
    between = gaps[split]
    min_gap = float(between.min()) if between.size else np.inf
    if min_gap < 10 * tol:
        raise ClusteringError(
            f"ambiguous degeneracy clustering: gap {min_gap:.3e} between classes is below 10*tol={10 * tol:.1e}"
        )
    starts = np.concatenate([[0], np.nonzero(split)[0] + 1]).astype(np.int64)
    class_id = np.empty(values.shape[0], dtype=np.int64)
    class_id[order] = np.cumsum(np.concatenate([[0], split.astype(np.int64)]))
    class_values = values[order][starts]
    return DegeneracyClasses(order.astype(np.int64), starts, class_id, class_values, float(tol), min_gap)


def degeneracy_classes(basis: SpectralBasis, tol: float = DEFAULT_TOL) -> DegeneracyClasses:
    return cluster_eigenvalues(basis.eigenvalues, tol)


def numerical_diagonalize(H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Dense symmetric eigendecomposition; eigenvalues ascending."""
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("expected a square matrix")
    scale = max(np.abs(H).max(), 1.0)
    if np.abs(H - H.T).max() > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    return np.linalg.eigh(H)


def spectrum_table(basis: SpectralBasis) -> list[tuple]:
    """Rows ``(index, m_x, m_y, theta_x, theta_y, lambda, class_id)`` sorted by lambda."""
    classes = basis.classes
    rows = []
    for rank, n in enumerate(classes.order):
        mode = basis.mode(int(n))
        rows.append(
            (rank, mode.mode_x.m, mode.mode_y.m, mode.mode_x.theta, mode.mode_y.theta,
             float(basis.eigenvalues[n]), int(classes.class_id[n]))
        )
    return rows
