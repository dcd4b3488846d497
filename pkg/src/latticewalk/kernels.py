"""Hot numeric kernels, each in a numba loop form and a vectorized numpy form.

Public functions dispatch on :func:`latticewalk._accel.get_backend`. Both
forms implement the same arithmetic and are cross-checked in the test suite;
``benchmarks/bench_kernels.py`` times them against each other.
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import get_backend, njit

# Miller recurrence rescales once values exceed this magnitude.
_BIG = 1e250
_SERIES_MAX_X = 1.0
_RESYNC = 64


# --------------------------------------------------------------------------
# limiting probabilities: class-resolved sums of eigenvector overlaps


@njit
def _class_sums_nb(Q, src, order, starts):
    n_nodes = Q.shape[0]
    n_cls = starts.shape[0]
    chi = np.zeros(n_nodes)
    for c in range(n_cls):
        lo = starts[c]
        hi = order.shape[0] if c + 1 == n_cls else starts[c + 1]
        for k in range(n_nodes):
            acc = 0j
            for p in range(lo, hi):
                n = order[p]
                acc += Q[k, n] * np.conj(Q[src, n])
            chi[k] += acc.real * acc.real + acc.imag * acc.imag
    return chi


def _class_sums_np(Q, src, order, starts):
    W = Q[:, order] * np.conj(Q[src, order])[None, :]
    S = np.add.reduceat(W, starts, axis=1)
    return (S.real**2 + S.imag**2).sum(axis=1)


def class_sums(Q: np.ndarray, src: int, order: np.ndarray, starts: np.ndarray) -> np.ndarray:
    """``sum_C |sum_{n in C} Q[k, n] conj(Q[src, n])|^2`` for every row ``k``.

    ``order`` lists mode indices grouped by class; ``starts`` are the offsets
    of each class inside ``order``.
    """
    Q = np.ascontiguousarray(Q, dtype=np.complex128)
    order = np.ascontiguousarray(order, dtype=np.int64)
    starts = np.ascontiguousarray(starts, dtype=np.int64)
    if get_backend() == "numba":
        return _class_sums_nb(Q, int(src), order, starts)
    return _class_sums_np(Q, int(src), order, starts)


# --------------------------------------------------------------------------
# resonance quadruples: lx[a] - lx[b] + ly[c] - ly[d] == 0 within tol


@njit
def _resonances_nb(lx, ly, tol):
    M = lx.shape[0]
    N = ly.shape[0]
    count = 0
    for a in range(M):
        for b in range(M):
            dx = lx[a] - lx[b]
            for c in range(N):
                for d in range(N):
                    if abs(dx + ly[c] - ly[d]) < tol:
                        count += 1
    out = np.empty((count, 4), dtype=np.int64)
    i = 0
    for a in range(M):
        for b in range(M):
            dx = lx[a] - lx[b]
            for c in range(N):
                for d in range(N):
                    if abs(dx + ly[c] - ly[d]) < tol:
                        out[i, 0] = a
                        out[i, 1] = b
                        out[i, 2] = c
                        out[i, 3] = d
                        i += 1
    return out


def _resonances_np(lx, ly, tol):
    M, N = lx.shape[0], ly.shape[0]
    dx = (lx[:, None] - lx[None, :]).ravel()
    dy = (ly[:, None] - ly[None, :]).ravel()
    ix, iy = np.nonzero(np.abs(dx[:, None] + dy[None, :]) < tol)
    return np.stack([ix // M, ix % M, iy // N, iy % N], axis=1).astype(np.int64)


def resonant_quadruples(lx: np.ndarray, ly: np.ndarray, tol: float) -> np.ndarray:
    """Index quadruples ``(a, b, c, d)`` whose eigenvalue differences cancel.

    Rows come out in lexicographic order for both backends.
    """
    lx = np.ascontiguousarray(lx, dtype=np.float64)
    ly = np.ascontiguousarray(ly, dtype=np.float64)
    if get_backend() == "numba":
        return _resonances_nb(lx, ly, float(tol))
    return _resonances_np(lx, ly, float(tol))


# --------------------------------------------------------------------------
# direct time average of |sum_n C[k, n] exp(-i lam_n t)|^2, trapezoid rule


@njit
def _time_average_nb(lam, Cr, Ci, dt, nsteps):
    K, n = Cr.shape
    acc = np.zeros(K)
    pr = np.empty(n)
    pi = np.empty(n)
    # one-step rotation exp(-i lam dt); phases are recomputed exactly every
    # _RESYNC steps so the recurrence error stays near rounding level
    rr = np.cos(lam * dt)
    ri = -np.sin(lam * dt)
    for s in range(nsteps + 1):
        if s % _RESYNC == 0:
            t = s * dt
            for m in range(n):
                pr[m] = math.cos(lam[m] * t)
                pi[m] = -math.sin(lam[m] * t)
        else:
            for m in range(n):
                a = pr[m] * rr[m] - pi[m] * ri[m]
                pi[m] = pr[m] * ri[m] + pi[m] * rr[m]
                pr[m] = a
        w = 0.5 if (s == 0 or s == nsteps) else 1.0
        for k in range(K):
            ar = 0.0
            ai = 0.0
            for m in range(n):
                ar += Cr[k, m] * pr[m] - Ci[k, m] * pi[m]
                ai += Cr[k, m] * pi[m] + Ci[k, m] * pr[m]
            acc[k] += w * (ar * ar + ai * ai)
    return acc / nsteps


def _time_average_np(lam, C, dt, nsteps, chunk=8192):
    acc = np.zeros(C.shape[0])
    for s0 in range(0, nsteps + 1, chunk):
        steps = np.arange(s0, min(s0 + chunk, nsteps + 1))
        w = np.ones(steps.shape[0])
        w[steps == 0] = 0.5
        w[steps == nsteps] = 0.5
        A = C @ np.exp(-1j * np.outer(lam, steps * dt))
        acc += (A.real**2 + A.imag**2) @ w
    return acc / nsteps


def time_average(lam: np.ndarray, C: np.ndarray, T: float, dt: float) -> np.ndarray:
    """Trapezoid estimate of ``(1/T) int_0^T |C exp(-i lam t)|^2 dt`` per row of ``C``."""
    nsteps = int(round(T / dt))
    if nsteps < 1 or not math.isclose(nsteps * dt, T, rel_tol=1e-9):
        raise ValueError(f"T={T} is not a whole number of steps dt={dt}")
    lam = np.ascontiguousarray(lam, dtype=np.float64)
    C = np.ascontiguousarray(C, dtype=np.complex128)
    if get_backend() == "numba":
        return _time_average_nb(lam, np.ascontiguousarray(C.real), np.ascontiguousarray(C.imag), float(dt), nsteps)
    return _time_average_np(lam, C, float(dt), nsteps)


# --------------------------------------------------------------------------
# Bessel functions of the first kind, integer order 0..nmax


def miller_start(nmax: int, x: float) -> int:
    """Even start order for the downward recurrence.

    ``nmax + 10 + 2x`` leaves errors near 1e-11 for low orders at x ~ 10;
    the extra 10 orders bring them to rounding level.
    """
    start = nmax + int(math.ceil(20.0 + 2.0 * x))
    return start + (start & 1)


@njit
def _bessel_series_nb(nmax, x, out):
    h = 0.5 * x
    h2 = h * h
    for n in range(nmax + 1):
        term = math.exp(n * math.log(h) - math.lgamma(n + 1.0))
        total = term
        k = 1
        while abs(term) > 1e-17 * abs(total) and k < 500:
            term *= -h2 / (k * (k + n))
            total += term
            k += 1
        out[n] = total


@njit
def _bessel_miller_nb(nmax, x, start, out):
    # downward recurrence J_{k-1} = (2k/x) J_k - J_{k+1} from an arbitrary seed
    f_next = 0.0
    f = 1e-30
    norm = 0.0
    for k in range(start, 0, -1):
        f_prev = (2.0 * k / x) * f - f_next
        f_next = f
        f = f_prev
        # f now holds the unnormalized J_{k-1}
        if k - 1 <= nmax:
            out[k - 1] = f
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * f
        if abs(f) > _BIG:
            f *= 1.0 / _BIG
            f_next *= 1.0 / _BIG
            norm *= 1.0 / _BIG
            for i in range(k - 1, nmax + 1):
                out[i] *= 1.0 / _BIG
    norm += f
    for i in range(nmax + 1):
        out[i] /= norm


@njit
def _bessel_table_nb(nmax, xs):
    out = np.zeros((xs.shape[0], nmax + 1))
    for i in range(xs.shape[0]):
        x = xs[i]
        if x == 0.0:
            out[i, 0] = 1.0
        elif x < _SERIES_MAX_X:
            _bessel_series_nb(nmax, x, out[i])
        else:
            start = nmax + int(math.ceil(20.0 + 2.0 * x))
            start += start & 1
            _bessel_miller_nb(nmax, x, start, out[i])
    return out


def _bessel_series_np(nmax, x):
    h = 0.5 * x[:, None]
    n = np.arange(nmax + 1)[None, :]
    with np.errstate(divide="ignore", under="ignore"):
        lg = np.array([math.lgamma(v + 1.0) for v in range(nmax + 1)])[None, :]
        term = np.exp(n * np.log(h) - lg)
    total = term.copy()
    for k in range(1, 500):
        term = term * (-(h * h) / (k * (k + n)))
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return total


def _bessel_miller_np(nmax, x):
    start = miller_start(nmax, float(x.max()))
    out = np.zeros((x.shape[0], nmax + 1))
    f_next = np.zeros_like(x)
    f = np.full_like(x, 1e-30)
    norm = np.zeros_like(x)
    for k in range(start, 0, -1):
        f, f_next = (2.0 * k / x) * f - f_next, f
        if k - 1 <= nmax:
            out[:, k - 1] = f
        if (k - 1) % 2 == 0 and k > 1:
            norm += 2.0 * f
        big = np.abs(f) > _BIG
        if big.any():
            f[big] /= _BIG
            f_next[big] /= _BIG
            norm[big] /= _BIG
            out[big, k - 1:] /= _BIG
    norm += f
    return out / norm[:, None]


def bessel_table(nmax: int, x) -> np.ndarray:
    """``J_0 .. J_nmax`` at each argument; shape ``(len(x), nmax + 1)``."""
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if np.any(xs < 0) or not np.all(np.isfinite(xs)):
        raise ValueError("Bessel arguments must be finite and non-negative")
    if get_backend() == "numba":
        return _bessel_table_nb(int(nmax), np.ascontiguousarray(xs))
    out = np.zeros((xs.shape[0], nmax + 1))
    out[xs == 0.0, 0] = 1.0
    small = (xs > 0) & (xs < _SERIES_MAX_X)
    large = xs >= _SERIES_MAX_X
    if small.any():
        out[small] = _bessel_series_np(nmax, xs[small])
    if large.any():
        out[large] = _bessel_miller_np(nmax, xs[large])
    return out
