"""Long-time averaged transition probabilities (limiting probabilities, LPs).

Three independent routes to ``chi[k, j] = lim (1/T) int_0^T pi_{k,j}(t) dt``:

``eigenclass``
    sum over degeneracy classes of ``|sum_{n in C} <k|q_n><q_n|j>|^2``.
``resonance-factorized``
    sum over chain-mode quadruples ``(mx, m'x, my, m'y)`` whose eigenvalue
    differences cancel, of the product of per-axis overlap factors.
``time-average-oracle``
    trapezoid quadrature of the evolution itself over a long but finite
    window; only meaningful for small lattices.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .lattice import BoundaryCondition, LatticeSpec, NodeIndex, as_node
from .spectral import DEFAULT_TOL, ChainBasis, SpectralBasis, build_basis

EIGENCLASS = "eigenclass"
FACTORIZED = "resonance-factorized"
TIME_AVERAGE = "time-average-oracle"

# fixed quadrature parameters of the time-average oracle
ORACLE_T = 1e4
ORACLE_DT = 0.01

ASYMMETRY_THRESHOLD = 1e-8
WORKERS_ENV = "LATTICEWALK_WORKERS"


@dataclass(frozen=True)
class LimitingDistribution:
    spec: LatticeSpec
    source: NodeIndex
    values: np.ndarray
    method: str
    tol: float

    def grid(self) -> np.ndarray:
        """``chi`` as an ``(M, N)`` array indexed ``[kx - 1, ky - 1]``."""
        return self.values.reshape(self.spec.M, self.spec.N)

    def at(self, kx: int, ky: int) -> float:
        return float(self.values[self.spec.flat((kx, ky))])

    @property
    def total(self) -> float:
        return float(self.values.sum())


def limiting_distribution(basis: SpectralBasis, j) -> LimitingDistribution:
    j = as_node(basis.spec, j)
    classes = basis.classes
    chi = kernels.class_sums(basis.vectors, basis.spec.flat(j), classes.order, classes.starts)
    return LimitingDistribution(basis.spec, j, chi, EIGENCLASS, classes.tol)


def resonance_quadruples(spec: LatticeSpec, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Chain-mode quadruples ``(mx, m'x, my, m'y)`` with
    ``lambda_x[mx] - lambda_x[m'x] + lambda_y[my] - lambda_y[m'y] = 0``."""
    basis = build_basis(spec, tol)
    g = spec.gamma
    return kernels.resonant_quadruples(g * basis.chain_x.eigenvalues, g * basis.chain_y.eigenvalues, tol)


def limiting_distribution_factorized(spec: LatticeSpec, j, tol: float = DEFAULT_TOL) -> LimitingDistribution:
    j = as_node(spec, j)
    basis = build_basis(spec, tol)
    quads = kernels.resonant_quadruples(
        spec.gamma * basis.chain_x.eigenvalues, spec.gamma * basis.chain_y.eigenvalues, tol
    )
    # per-axis overlap <k|theta><theta|j>, rows k, columns chain mode
    Vx, Vy = basis.chain_x.vectors, basis.chain_y.vectors
    ax = Vx * np.conj(Vx[j.jx - 1])[None, :]
    ay = Vy * np.conj(Vy[j.jy - 1])[None, :]
    a, b, c, d = quads.T
    X = ax[:, a] * np.conj(ax[:, b])
    Y = ay[:, c] * np.conj(ay[:, d])
    chi = (X @ Y.T).real.ravel()
    return LimitingDistribution(spec, j, chi, FACTORIZED, tol)


def time_averaged_distribution(
    basis: SpectralBasis, j, T: float = ORACLE_T, dt: float = ORACLE_DT
) -> LimitingDistribution:
    """Direct trapezoid average of ``pi_{k,j}(t)`` over ``[0, T]``."""
    j = as_node(basis.spec, j)
    Q = basis.vectors
    C = Q * np.conj(Q[basis.spec.flat(j)])[None, :]
    chi = kernels.time_average(basis.eigenvalues, C, T, dt)
    return LimitingDistribution(basis.spec, j, chi, TIME_AVERAGE, basis.tol)


def marginals(dist: LimitingDistribution, axis: str) -> np.ndarray:
    """Sum over the *other* axis: ``axis='x'`` gives a length-M vector over ``k_x``."""
    grid = dist.grid()
    if axis == "x":
        return grid.sum(axis=1)
    if axis == "y":
        return grid.sum(axis=0)
    raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")


def chain_difference_census(extent: int, bc, tol: float = DEFAULT_TOL) -> dict[float, int]:
    """Multiplicity of each ``lambda_m - lambda_m'`` (``m != m'``) on one chain.

    Keys are representative difference values; values are how many ordered
    pairs produce them.
    """
    lam = ChainBasis.build(extent, bc).eigenvalues
    m, mp = np.nonzero(~np.eye(extent, dtype=bool))
    diffs = np.sort(lam[m] - lam[mp])
    groups = np.split(diffs, np.nonzero(np.diff(diffs) >= tol)[0] + 1)
    return {float(g[0]): len(g) for g in groups}


# --------------------------------------------------------------------------
# asymmetry scans

MIRRORS = ("opposite-corner", "axial")


@dataclass(frozen=True)
class AsymmetryScanRow:
    M: int
    N: int
    bc: str
    mirror: str
    delta: float
    threshold: float = ASYMMETRY_THRESHOLD

    @property
    def is_asymmetric(self) -> bool:
        return abs(self.delta) > self.threshold


def mirror_node(spec: LatticeSpec, mirror: str) -> NodeIndex:
    """``(M, N)`` for the opposite corner, ``(1, N)`` for the axial mirror."""
    if mirror == "opposite-corner":
        return NodeIndex(spec.M, spec.N)
    if mirror == "axial":
        return NodeIndex(1, spec.N)
    raise ValueError(f"mirror must be one of {MIRRORS}, got {mirror!r}")


def corner_asymmetry(spec: LatticeSpec, mirror: str, tol: float = DEFAULT_TOL,
                     threshold: float = ASYMMETRY_THRESHOLD) -> AsymmetryScanRow:
    """``chi[c, c] - chi[mirror, c]`` for a walk started at ``c = (1, 1)``."""
    dist = limiting_distribution(build_basis(spec, tol), (1, 1))
    target = mirror_node(spec, mirror)
    delta = dist.at(1, 1) - dist.at(target.jx, target.jy)
    return AsymmetryScanRow(spec.M, spec.N, spec.topology, mirror, float(delta), threshold)


def _scan_item(args):
    return corner_asymmetry(*args)


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)


def asymmetry_scan(
    bc_x,
    bc_y,
    sizes,
    *,
    square: bool = False,
    fixed_M: int | None = None,
    fixed_N: int | None = None,
    mirror: str | None = None,
    gamma: float = 1.0,
    tol: float = DEFAULT_TOL,
    threshold: float = ASYMMETRY_THRESHOLD,
    workers: int | None = None,
) -> list[AsymmetryScanRow]:
    """Corner-seeded LP asymmetry for a family of lattices.

    Exactly one of ``square``, ``fixed_M`` or ``fixed_N`` selects the family:
    ``M = N = s``, ``(fixed_M, s)`` or ``(s, fixed_N)`` for ``s`` in ``sizes``.
    The mirror defaults to the opposite corner for rectangles and to the
    axial node ``(1, N)`` otherwise. Rows come back ordered as ``sizes``.
    """
    bc_x, bc_y = BoundaryCondition.parse(bc_x), BoundaryCondition.parse(bc_y)
    if sum([square, fixed_M is not None, fixed_N is not None]) != 1:
        raise ValueError("choose exactly one of square, fixed_M, fixed_N")
    if mirror is None:
        mirror = "opposite-corner" if not (bc_x.is_periodic or bc_y.is_periodic) else "axial"
    if mirror not in MIRRORS:
        raise ValueError(f"mirror must be one of {MIRRORS}, got {mirror!r}")
    specs = []
    for s in sizes:
        M, N = (s, s) if square else (fixed_M, s) if fixed_M is not None else (s, fixed_N)
        specs.append(LatticeSpec(M, N, bc_x, bc_y, gamma))
    items = [(spec, mirror, tol, threshold) for spec in specs]
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(items) < 2:
        return [_scan_item(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(_scan_item, items))


__all__ = [
    "ASYMMETRY_THRESHOLD", "AsymmetryScanRow", "EIGENCLASS", "FACTORIZED", "LimitingDistribution",
    "ORACLE_DT", "ORACLE_T", "TIME_AVERAGE", "asymmetry_scan", "chain_difference_census",
    "corner_asymmetry", "limiting_distribution", "limiting_distribution_factorized", "marginals",
    "mirror_node", "resonance_quadruples", "time_averaged_distribution",
]
