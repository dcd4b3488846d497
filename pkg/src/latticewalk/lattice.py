"""Lattice definitions and the discrete Laplacian (Hamiltonian) assembly.

Nodes carry 1-based labels ``(jx, jy)`` with ``1 <= jx <= M`` and
``1 <= jy <= N``. The flat index used for every dense array in the package is
row-major in x then y::

    flat = (jx - 1) * N + (jy - 1)

so that dense operators are Kronecker products ``A_x (x) A_y``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np


class LatticeError(ValueError):
    """Invalid lattice specification or node."""


class BoundaryCondition(enum.Enum):
    PERIODIC = "periodic"
    OPEN = "open"

    @classmethod
    def parse(cls, value) -> "BoundaryCondition":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"p": "periodic", "pbc": "periodic", "o": "open", "obc": "open"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise LatticeError(f"unknown boundary condition {value!r}") from None

    @property
    def is_periodic(self) -> bool:
        return self is BoundaryCondition.PERIODIC


PERIODIC = BoundaryCondition.PERIODIC
OPEN = BoundaryCondition.OPEN


def check_extent(extent: int, bc: BoundaryCondition) -> None:
    """Reject chains that are too short; periodic axes need 3 sites to avoid double bonds."""
    if int(extent) != extent or extent < 2:
        raise LatticeError(f"extent must be an integer >= 2, got {extent!r}")
    if bc.is_periodic and extent < 3:
        raise LatticeError("a periodic axis needs at least 3 sites (extent 2 would form a double bond)")


@dataclass(frozen=True)
class LatticeSpec:
    """An ``M x N`` lattice with one boundary condition per axis.

    ``(open, open)`` is a rectangle, one periodic axis a cylinder and
    ``(periodic, periodic)`` a torus. ``gamma`` is the bond transmission rate.
    """

    M: int
    N: int
    bc_x: BoundaryCondition = OPEN
    bc_y: BoundaryCondition = OPEN
    gamma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "bc_x", BoundaryCondition.parse(self.bc_x))
        object.__setattr__(self, "bc_y", BoundaryCondition.parse(self.bc_y))
        check_extent(self.M, self.bc_x)
        check_extent(self.N, self.bc_y)
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "N", int(self.N))
        gamma = float(self.gamma)
        if not np.isfinite(gamma) or gamma <= 0:
            raise LatticeError(f"gamma must be a positive finite number, got {self.gamma!r}")
        object.__setattr__(self, "gamma", gamma)

    @classmethod
    def torus(cls, M: int, N: int, gamma: float = 1.0) -> "LatticeSpec":
        return cls(M, N, PERIODIC, PERIODIC, gamma)

    @classmethod
    def cylinder(cls, M: int, N: int, gamma: float = 1.0) -> "LatticeSpec":
        """Periodic along x, open along y."""
        return cls(M, N, PERIODIC, OPEN, gamma)

    @classmethod
    def rectangle(cls, M: int, N: int, gamma: float = 1.0) -> "LatticeSpec":
        return cls(M, N, OPEN, OPEN, gamma)

    @classmethod
    def from_mapping(cls, values: Mapping[str, object]) -> "LatticeSpec":
        try:
            return cls(
                M=int(values["M"]),
                N=int(values["N"]),
                bc_x=values.get("bc_x", "open"),
                bc_y=values.get("bc_y", "open"),
                gamma=float(values.get("gamma", 1.0)),
            )
        except KeyError as exc:
            raise LatticeError(f"missing lattice key {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, LatticeError):
                raise
            raise LatticeError(str(exc)) from None

    @property
    def size(self) -> int:
        return self.M * self.N

    @property
    def topology(self) -> str:
        periodic = self.bc_x.is_periodic + self.bc_y.is_periodic
        return ("rectangle", "cylinder", "torus")[periodic]

    def as_dict(self) -> dict:
        return {"M": self.M, "N": self.N, "bc_x": self.bc_x.value, "bc_y": self.bc_y.value, "gamma": self.gamma}

    def nodes(self) -> Iterator["NodeIndex"]:
        for jx in range(1, self.M + 1):
            for jy in range(1, self.N + 1):
                yield NodeIndex(jx, jy)

    def node(self, jx: int, jy: int) -> "NodeIndex":
        node = NodeIndex(int(jx), int(jy))
        node.check(self)
        return node

    def flat(self, node: "NodeIndex | tuple[int, int]") -> int:
        node = NodeIndex(*node) if not isinstance(node, NodeIndex) else node
        node.check(self)
        return (node.jx - 1) * self.N + (node.jy - 1)

    def unflat(self, index: int) -> "NodeIndex":
        if not 0 <= index < self.size:
            raise LatticeError(f"flat index {index} outside [0, {self.size})")
        return NodeIndex(index // self.N + 1, index % self.N + 1)


@dataclass(frozen=True, order=True)
class NodeIndex:
    jx: int
    jy: int

    def check(self, spec: LatticeSpec) -> None:
        if not (1 <= self.jx <= spec.M and 1 <= self.jy <= spec.N):
            raise LatticeError(f"node ({self.jx}, {self.jy}) outside the {spec.M}x{spec.N} lattice")

    def __iter__(self):
        return iter((self.jx, self.jy))


def as_node(spec: LatticeSpec, node) -> NodeIndex:
    """Accept a ``NodeIndex`` or an ``(jx, jy)`` pair and validate it."""
    if not isinstance(node, NodeIndex):
        jx, jy = node
        node = NodeIndex(int(jx), int(jy))
    node.check(spec)
    return node


def chain_laplacian(extent: int, bc: BoundaryCondition) -> np.ndarray:
    """Laplacian of a single chain (open) or ring (periodic)."""
    bc = BoundaryCondition.parse(bc)
    check_extent(extent, bc)
    A = 2.0 * np.eye(extent)
    idx = np.arange(extent - 1)
    A[idx, idx + 1] = A[idx + 1, idx] = -1.0
    if bc.is_periodic:
        A[0, -1] = A[-1, 0] = -1.0
    else:
        A[0, 0] = A[-1, -1] = 1.0
    return A


def build_hamiltonian(spec: LatticeSpec) -> np.ndarray:
    """Dense ``H = gamma * A`` for the lattice, ``A`` the graph Laplacian.

    Assembled bond by bond from the neighbour rule, independently of the
    per-axis chain operators, so it can serve as a check on them.
    """
    M, N = spec.M, spec.N
    H = np.zeros((spec.size, spec.size))
    for jx in range(M):
        for jy in range(N):
            here = jx * N + jy
            # bonds to +x and +y neighbours; each bond is visited once
            if jx + 1 < M or spec.bc_x.is_periodic:
                _add_bond(H, here, ((jx + 1) % M) * N + jy)
            if jy + 1 < N or spec.bc_y.is_periodic:
                _add_bond(H, here, jx * N + (jy + 1) % N)
    return spec.gamma * H


def _add_bond(H: np.ndarray, a: int, b: int) -> None:
    H[a, b] -= 1.0
    H[b, a] -= 1.0
    H[a, a] += 1.0
    H[b, b] += 1.0


def functionality(spec: LatticeSpec, node) -> int:
    """Number of bonds attached to ``node``."""
    node = as_node(spec, node)
    fx = 2 if spec.bc_x.is_periodic or 1 < node.jx < spec.M else 1
    fy = 2 if spec.bc_y.is_periodic or 1 < node.jy < spec.N else 1
    return fx + fy


def parse_config(text: str) -> dict[str, str]:
    """Parse flat ``key = value`` text; ``#`` starts a comment."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise LatticeError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip().replace("-", "_")
        if not key:
            raise LatticeError(f"line {lineno}: empty key")
        values[key] = value.strip()
    return values


def hamiltonian_csv(H: np.ndarray) -> str:
    """Dense row-major CSV dump, 17 significant digits."""
    return "".join(",".join(f"{v:.17g}" for v in row) + "\n" for row in H)
