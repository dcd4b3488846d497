"""Infinite-lattice reference solution built from Bessel functions.

On the unbounded square lattice the walk from ``j`` reaches ``k`` with
amplitude ``i^dx i^dy exp(-4 i t) J_dx(2t) J_dy(2t)``, ``(dx, dy) = k - j``
(unit rate). Finite tori approach it as long as the ballistic front, moving
about two sites per unit time, has not wrapped around.
"""
from __future__ import annotations

import numpy as np

from . import kernels
from .dynamics import quantum_probabilities
from .lattice import LatticeSpec
from .spectral import build_basis

MAX_ORDER = 200


class BesselOrderError(ValueError):
    pass


def bessel_j(n: int, x: float, max_order: int = MAX_ORDER) -> float:
    """``J_n(x)`` for integer ``n`` and ``x >= 0``."""
    n = int(n)
    if abs(n) > max_order:
        raise BesselOrderError(f"order {n} exceeds the maximum {max_order}")
    value = float(kernels.bessel_table(abs(n), float(x))[0, abs(n)])
    return -value if n < 0 and n % 2 else value


def bessel_j_orders(orders, x: float, max_order: int = MAX_ORDER) -> np.ndarray:
    """``J_n(x)`` for an array of integer orders at one argument."""
    orders = np.asarray(orders, dtype=np.int64)
    top = int(np.abs(orders).max()) if orders.size else 0
    if top > max_order:
        raise BesselOrderError(f"order {top} exceeds the maximum {max_order}")
    table = kernels.bessel_table(top, float(x))[0]
    values = table[np.abs(orders)]
    return np.where((orders < 0) & (orders % 2 == 1), -values, values)


def continuum_amplitude(dx: int, dy: int, t: float) -> complex:
    if t < 0:
        raise ValueError("t must be >= 0")
    jx, jy = bessel_j_orders([dx, dy], 2.0 * t)
    return complex((1j) ** (dx % 4) * (1j) ** (dy % 4) * np.exp(-4j * t) * jx * jy)


def continuum_probability(dx: int, dy: int, t: float) -> float:
    if t < 0:
        raise ValueError("t must be >= 0")
    jx, jy = bessel_j_orders([dx, dy], 2.0 * t)
    return float((jx * jy) ** 2)


def continuum_grid(radius: int, t: float) -> np.ndarray:
    """Probabilities for ``|dx|, |dy| <= radius``, indexed ``[dx + radius, dy + radius]``."""
    d = np.arange(-radius, radius + 1)
    J = bessel_j_orders(d, 2.0 * t)
    return np.outer(J**2, J**2)


def far_from_boundary(extent: int, d: int, t: float) -> bool:
    """Whether displacement ``d`` at time ``t`` is safely inside a ring of ``extent`` sites."""
    return 2.0 * t + abs(d) < extent / 2.0 - 2.0


def compare_with_torus(extent: int, t: float, radius: int) -> list[tuple]:
    """Rows ``(t, dx, dy, pi_finite, pi_continuum, abs_diff)`` on an ``extent x extent`` torus.

    The walk starts at the central node; every displacement within
    ``radius`` must satisfy :func:`far_from_boundary`.
    """
    if not far_from_boundary(extent, radius, t):
        raise ValueError(f"radius {radius} at t={t} reaches the boundary of a {extent}-site torus")
    spec = LatticeSpec.torus(extent, extent)
    c = extent // 2 + 1
    finite = quantum_probabilities(build_basis(spec), (c, c), t).reshape(extent, extent)
    cont = continuum_grid(radius, t)
    rows = []
    for dx in range(-radius, radius + 1):
        for dy in range(-radius, radius + 1):
            pf = float(finite[c - 1 + dx, c - 1 + dy])
            pc = float(cont[dx + radius, dy + radius])
            rows.append((t, dx, dy, pf, pc, abs(pf - pc)))
    return rows
