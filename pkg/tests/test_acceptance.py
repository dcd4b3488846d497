"""Acceptance gate: one test per criterion, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -s`` to see the pass/fail lines as
they happen; they are also collected in the terminal summary.
"""
import time

import numpy as np
import pytest
from scipy.linalg import expm

from latticewalk.dynamics import (
    classical_avg_return,
    lower_bound_mu,
    quantum_amplitudes,
    quantum_avg_return,
)
from latticewalk.lattice import OPEN, PERIODIC, LatticeSpec, build_hamiltonian
from latticewalk.limiting import (
    asymmetry_scan,
    limiting_distribution,
    limiting_distribution_factorized,
    marginals,
    time_averaged_distribution,
)
from latticewalk.continuum import compare_with_torus
from latticewalk.spectral import build_basis, numerical_diagonalize

from conftest import random_battery

TOPOLOGIES = {
    "rectangle": (OPEN, OPEN),
    "cylinder": (PERIODIC, OPEN),
    "torus": (PERIODIC, PERIODIC),
}


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        return False


def test_criterion_01_torus_bound_exact(acceptance_report):
    with Timer() as clock:
        basis = build_basis(LatticeSpec.torus(15, 11))
        ts = np.logspace(-2, 2, 200)
        err = np.abs(quantum_avg_return(basis, ts) - lower_bound_mu(basis.eigenvalues, ts)).max()
    ok = err < 1e-10 and clock.elapsed < 5
    acceptance_report(1, "15x11 torus |pi - mu| < 1e-10 at 200 times", ok,
                      f"max {err:.2e}, {clock.elapsed:.2f}s")
    assert ok


def test_criterion_02_spectral_ordering(acceptance_report):
    with Timer() as clock:
        lam = {name: np.sort(build_basis(LatticeSpec(15, 11, *bcs)).eigenvalues)
               for name, bcs in TOPOLOGIES.items()}
        ok_order = bool(np.all(lam["rectangle"] <= lam["cylinder"] + 1e-12)
                        and np.all(lam["cylinder"] <= lam["torus"] + 1e-12))
    ok = ok_order and len(lam["torus"]) == 165 and clock.elapsed < 1
    acceptance_report(2, "rectangle <= cylinder <= torus eigenvalues, n = 1..165", ok,
                      f"{clock.elapsed:.3f}s")
    assert ok


def test_criterion_03_classical_equipartition(acceptance_report):
    plateau = {}
    for name, bcs in TOPOLOGIES.items():
        lam = build_basis(LatticeSpec(15, 11, *bcs)).eigenvalues
        plateau[name] = abs(classical_avg_return(lam, 1e3) - 1 / 165)
    ts = np.logspace(np.log10(0.5), np.log10(5), 50)
    torus = build_basis(LatticeSpec.torus(15, 11)).eigenvalues
    slope = np.polyfit(np.log(ts), np.log(classical_avg_return(torus, ts)), 1)[0]
    ok = max(plateau.values()) < 1e-8 and abs(slope + 1) <= 0.15
    acceptance_report(3, "classical plateau 1/165 and t^-1 regime", ok,
                      f"max plateau error {max(plateau.values()):.1e}, slope {slope:.3f}")
    assert ok


def _flagged(rows):
    return [row.N for row in rows if row.is_asymmetric]


def test_criterion_04_square_census(acceptance_report):
    with Timer() as clock:
        rows = asymmetry_scan(OPEN, OPEN, range(4, 37), square=True)
    flagged = _flagged(rows)
    ok = flagged == [6, 12, 15, 18, 21, 24, 30, 36] and clock.elapsed < 600
    acceptance_report(4, "open MxM scan M=4..36", ok, f"flagged {flagged}, {clock.elapsed:.1f}s")
    assert ok


def test_criterion_05_cylinder_census(acceptance_report):
    rows = asymmetry_scan(PERIODIC, OPEN, range(4, 31), square=True, mirror="axial")
    flagged = _flagged(rows)
    ok = flagged == [6, 15, 18, 21, 30]
    acceptance_report(5, "MxM cylinder scan M=4..30, mirror (1, M)", ok, f"flagged {flagged}")
    assert ok


def test_criterion_06_cylinder_length_scan(acceptance_report):
    rows = asymmetry_scan(PERIODIC, OPEN, range(4, 31), fixed_M=15, mirror="axial")
    flagged = _flagged(rows)
    ok = flagged == [10, 15, 30]
    acceptance_report(6, "15xN cylinder scan N=4..30", ok, f"flagged {flagged}")
    assert ok


def test_criterion_07_marginals(acceptance_report):
    ring15 = marginals(limiting_distribution(build_basis(LatticeSpec.cylinder(15, 15)), (1, 1)), "x")
    err_max = abs(ring15[0] - 29 / 225)
    err_plateau = np.abs(ring15[1:] - 14 / 225).max()
    ring14 = marginals(limiting_distribution(build_basis(LatticeSpec.cylinder(14, 14)), (1, 1)), "x")
    top = np.flatnonzero(np.isclose(ring14, ring14.max(), rtol=0, atol=1e-9)) + 1
    ok = err_max < 1e-9 and err_plateau < 1e-9 and top.tolist() == [1, 8]
    acceptance_report(7, "ring marginals 29/225, 14/225 and 14x14 maxima", ok,
                      f"errors {err_max:.1e}/{err_plateau:.1e}, maxima at {top.tolist()}")
    assert ok


@pytest.mark.slow
def test_criterion_08_oracle_equivalence(acceptance_report):
    worst_avg = worst_fact = 0.0
    with Timer() as clock:
        for M, N in [(4, 3), (5, 4)]:
            for bcs in TOPOLOGIES.values():
                spec = LatticeSpec(M, N, *bcs)
                basis = build_basis(spec)
                for source in spec.nodes():
                    chi = limiting_distribution(basis, source).values
                    fact = limiting_distribution_factorized(spec, source).values
                    avg = time_averaged_distribution(basis, source).values
                    worst_avg = max(worst_avg, np.abs(chi - avg).max())
                    worst_fact = max(worst_fact, np.abs(chi - fact).max())
    ok = worst_avg < 2e-3 and worst_fact < 1e-9 and clock.elapsed < 120
    acceptance_report(8, "eigenclass vs time average and factorized LPs", ok,
                      f"time avg {worst_avg:.1e}, factorized {worst_fact:.1e}, {clock.elapsed:.1f}s")
    assert ok


def test_criterion_09_continuum_limit(acceptance_report):
    with Timer() as clock:
        rows = compare_with_torus(101, 5.0, 20)
    err = max(row[5] for row in rows)
    ok = err < 1e-8 and len(rows) == 41 * 41 and clock.elapsed < 120
    acceptance_report(9, "101x101 torus vs Bessel continuum at t=5", ok, f"max {err:.1e}, {clock.elapsed:.2f}s")
    assert ok


def test_criterion_10_property_battery(acceptance_report):
    battery = random_battery(2026, count=24)
    failures = []
    for spec, source, t in battery:
        basis = build_basis(spec)
        H = build_hamiltonian(spec)
        j = spec.flat(source)
        alpha = quantum_amplitudes(basis, source, t)
        pi = alpha.probabilities
        if abs(pi.sum() - 1) > 1e-10:
            failures.append(("unitarity", spec, source, t))
        U = expm(-1j * t * H)
        if np.abs(U[:, j] - alpha.values).max() > 1e-9:
            failures.append(("expm", spec, source, t))
        grid = pi.reshape(spec.M, spec.N)
        if np.abs(grid - np.outer(grid.sum(axis=1), grid.sum(axis=0))).max() > 1e-12:
            failures.append(("factorization", spec, source, t))
        chi = limiting_distribution(basis, source).values
        if abs(chi.sum() - 1) > 1e-10:
            failures.append(("normalization", spec, source, t))
        k = (int(np.argmax(chi)) % spec.N) or 0
        target = spec.unflat(len(chi) - 1 - k)
        back = limiting_distribution(basis, target).values[j]
        if abs(back - chi[spec.flat(target)]) > 1e-12:
            failures.append(("exchange", spec, source, t))
        numeric, _ = numerical_diagonalize(H)
        if np.abs(np.sort(basis.eigenvalues) - numeric).max() > 1e-9:
            failures.append(("spectrum", spec, source, t))
    ok = len(battery) >= 20 and all(s.size <= 100 for s, _, _ in battery) and not failures
    acceptance_report(10, f"property battery over {len(battery)} triples", ok,
                      f"{len(failures)} failures" if failures else "")
    assert ok, failures
