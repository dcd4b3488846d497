"""Both kernel backends must agree with each other and with plain references."""
import math

import numpy as np
import pytest
import scipy.special

from latticewalk import _accel, kernels
from latticewalk.lattice import LatticeSpec
from latticewalk.spectral import build_basis


def _both(fn, *args):
    with _accel.backend("numpy"):
        a = fn(*args)
    if not _accel.HAVE_NUMBA:
        return a, a
    with _accel.backend("numba"):
        b = fn(*args)
    return a, b


def test_backend_switching():
    before = _accel.get_backend()
    with _accel.backend("numpy"):
        assert _accel.get_backend() == "numpy"
    assert _accel.get_backend() == before
    with pytest.raises(ValueError):
        _accel.set_backend("fortran")


def test_class_sums_backends_agree():
    basis = build_basis(LatticeSpec.rectangle(12, 12))
    c = basis.classes
    a, b = _both(kernels.class_sums, basis.vectors, 5, c.order, c.starts)
    np.testing.assert_allclose(a, b, atol=1e-14)


def test_class_sums_plain_reference():
    rng = np.random.default_rng(1)
    Q = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    order = np.array([3, 0, 5, 1, 2, 4])
    starts = np.array([0, 2, 3])
    groups = [[3, 0], [5], [1, 2, 4]]
    ref = np.zeros(6)
    for k in range(6):
        for g in groups:
            ref[k] += abs(sum(Q[k, n] * np.conj(Q[2, n]) for n in g)) ** 2
    for res in _both(kernels.class_sums, Q, 2, order, starts):
        np.testing.assert_allclose(res, ref, rtol=1e-13)


def test_resonances_backends_agree():
    basis = build_basis(LatticeSpec.cylinder(9, 7))
    a, b = _both(kernels.resonant_quadruples, basis.chain_x.eigenvalues, basis.chain_y.eigenvalues, 1e-9)
    np.testing.assert_array_equal(a, b)


def test_time_average_backends_agree():
    rng = np.random.default_rng(2)
    lam = rng.uniform(0, 8, 7)
    C = rng.normal(size=(3, 7)) + 1j * rng.normal(size=(3, 7))
    a, b = _both(kernels.time_average, lam, C, 20.0, 0.01)
    np.testing.assert_allclose(a, b, rtol=1e-11)


def test_time_average_of_constant():
    C = np.array([[0.6, 0.0], [0.0, 0.8]], dtype=complex)
    for res in _both(kernels.time_average, np.array([0.0, 1.0]), C, 3.0, 0.01):
        np.testing.assert_allclose(res, [0.36, 0.64], rtol=1e-12)


def power_series_j(n, x, terms=60):
    """Oracle: direct power series of J_n."""
    return sum((-1) ** k * (x / 2) ** (2 * k + n) / (math.factorial(k) * math.factorial(k + n)) for k in range(terms))


@pytest.mark.parametrize("x", [0.05, 0.5, 0.999, 1.0, 2.0, 3.7, 6.0])
def test_bessel_table_against_power_series(x, kernel_backend):
    table = kernels.bessel_table(12, x)[0]
    for n in range(13):
        ref = power_series_j(n, x)
        assert table[n] == pytest.approx(ref, rel=1e-10, abs=1e-15)


def test_bessel_backends_agree_on_grid():
    xs = np.array([0.0, 1e-6, 0.3, 1.0, 2.5, 10.0, 37.0, 80.0])
    a, b = _both(kernels.bessel_table, 120, xs)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-300)


@pytest.mark.parametrize("x", [10.0, 25.0, 60.0, 150.0])
def test_bessel_large_argument_against_scipy(x, kernel_backend):
    table = kernels.bessel_table(200, x)[0]
    ref = scipy.special.jv(np.arange(201), x)
    assert np.abs(table - ref).max() < 1e-12
    big = np.abs(ref) > 1e-3
    assert np.max(np.abs(table[big] / ref[big] - 1)) < 1e-10


def test_bessel_rejects_negative_argument():
    with pytest.raises(ValueError):
        kernels.bessel_table(3, -1.0)
