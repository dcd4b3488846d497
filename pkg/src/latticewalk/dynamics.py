"""Time evolution of quantum (CTQW) and classical (CTRW) walks.

Because ``H`` separates into x and y chain parts, the propagators factor as
``exp(-i H t) = exp(-i H_x t) (x) exp(-i H_y t)``. All node-resolved
quantities are computed through that factorization, which is what makes
lattices of ~10^4 nodes cheap; the dense ``SpectralBasis.vectors`` is never
needed here.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import LatticeSpec, NodeIndex, as_node
from .spectral import ChainBasis, SpectralBasis

# classical probabilities below this are treated as rounding noise
NEGATIVE_SLACK = 1e-12


class NegativeProbabilityError(ArithmeticError):
    pass


def _check_time(t: float) -> float:
    t = float(t)
    if not np.isfinite(t) or t < 0:
        raise ValueError(f"time must be finite and >= 0, got {t!r}")
    return t


@dataclass(frozen=True)
class AmplitudeField:
    """Amplitudes ``alpha[k]`` from ``source`` at ``time``, indexed by flat node."""

    spec: LatticeSpec
    source: NodeIndex
    time: float
    values: np.ndarray

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def grid(self) -> np.ndarray:
        """Amplitudes as an ``(M, N)`` array, ``[kx - 1, ky - 1]``."""
        return self.values.reshape(self.spec.M, self.spec.N)


def chain_amplitudes(chain: ChainBasis, j: int, t: float, gamma: float = 1.0) -> np.ndarray:
    """``alpha_{k, j}(t)`` for a single chain, all ``k``."""
    V = chain.vectors
    phase = np.exp(-1j * gamma * _check_time(t) * chain.eigenvalues)
    return V @ (phase * np.conj(V[j - 1]))


def chain_probabilities(chain: ChainBasis, j: int, t: float, gamma: float = 1.0) -> np.ndarray:
    return np.abs(chain_amplitudes(chain, j, t, gamma)) ** 2


def quantum_amplitudes(basis: SpectralBasis, j, t: float) -> AmplitudeField:
    spec = basis.spec
    j = as_node(spec, j)
    t = _check_time(t)
    ax = chain_amplitudes(basis.chain_x, j.jx, t, spec.gamma)
    ay = chain_amplitudes(basis.chain_y, j.jy, t, spec.gamma)
    return AmplitudeField(spec, j, t, np.outer(ax, ay).ravel())


def quantum_probabilities(basis: SpectralBasis, j, t: float) -> np.ndarray:
    return quantum_amplitudes(basis, j, t).probabilities


def _clamp(p: np.ndarray) -> np.ndarray:
    low = p.min()
    if low < -NEGATIVE_SLACK:
        raise NegativeProbabilityError(f"classical probability {low:.3e} is negative beyond rounding")
    return np.where(p < 0, 0.0, p)


def classical_probabilities(basis: SpectralBasis, j, t: float) -> np.ndarray:
    """``p_{k, j}(t) = <k| exp(-gamma A t) |j>`` for all flat ``k``."""
    spec = basis.spec
    j = as_node(spec, j)
    t = _check_time(t)
    px = _chain_classical(basis.chain_x, j.jx, t, spec.gamma)
    py = _chain_classical(basis.chain_y, j.jy, t, spec.gamma)
    return _clamp(np.outer(px, py).ravel())


def _chain_classical(chain: ChainBasis, j: int, t: float, gamma: float) -> np.ndarray:
    V = chain.vectors
    decay = np.exp(-gamma * t * chain.eigenvalues)
    # conjugate Bloch pairs combine to a real sum; the imaginary part is rounding
    return (V @ (decay * np.conj(V[j - 1]))).real


def _times(t) -> tuple[np.ndarray, bool]:
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise ValueError("times must be finite and >= 0")
    return np.atleast_1d(arr), arr.ndim == 0


def classical_avg_return(eigenvalues, t):
    """``(1/N) sum_n exp(-lambda_n t)``; scalar or array ``t``.

    ``eigenvalues`` must already include the rate ``gamma``.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    ts, scalar = _times(t)
    out = np.exp(-np.outer(ts, lam)).mean(axis=1)
    return float(out[0]) if scalar else out


def lower_bound_mu(eigenvalues, t):
    """``|sum_n exp(-i lambda_n t)|^2 / N^2``; depends on the spectrum only."""
    lam = np.asarray(eigenvalues, dtype=float)
    ts, scalar = _times(t)
    s = np.exp(-1j * np.outer(ts, lam)).mean(axis=1)
    out = s.real**2 + s.imag**2
    return float(out[0]) if scalar else out


def _chain_return_sq(chain: ChainBasis, ts: np.ndarray, gamma: float) -> np.ndarray:
    """``sum_k |alpha_{k,k}(t)|^2`` for one chain, per time; shape ``(len(ts),)``."""
    weights = np.abs(chain.vectors) ** 2  # |<k|theta>|^2, rows k
    diag = weights @ np.exp(-1j * gamma * np.outer(chain.eigenvalues, ts))
    return (diag.real**2 + diag.imag**2).sum(axis=0)


def quantum_avg_return(basis: SpectralBasis, t):
    """``(1/N) sum_k |alpha_{k,k}(t)|^2``; scalar or array ``t``."""
    ts, scalar = _times(t)
    g = basis.spec.gamma
    out = _chain_return_sq(basis.chain_x, ts, g) * _chain_return_sq(basis.chain_y, ts, g) / basis.size
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class ReturnCurve:
    times: np.ndarray
    classical: np.ndarray
    quantum: np.ndarray
    mu: np.ndarray

    def rows(self):
        return zip(self.times, self.classical, self.quantum, self.mu)


def log_time_grid(t_min: float = 1e-2, t_max: float = 1e2, per_decade: int = 300) -> np.ndarray:
    if not (0 < t_min < t_max) or per_decade < 1:
        raise ValueError("need 0 < t_min < t_max and per_decade >= 1")
    decades = np.log10(t_max) - np.log10(t_min)
    n = int(round(decades * per_decade)) + 1
    return np.logspace(np.log10(t_min), np.log10(t_max), n)


def return_curve(basis: SpectralBasis, times) -> ReturnCurve:
    ts, _ = _times(times)
    lam = basis.eigenvalues
    return ReturnCurve(ts, classical_avg_return(lam, ts), quantum_avg_return(basis, ts), lower_bound_mu(lam, ts))
