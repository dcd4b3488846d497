import numpy as np
import pytest

from latticewalk import _accel
from latticewalk.lattice import OPEN, PERIODIC, LatticeSpec

BC_PAIRS = [(OPEN, OPEN), (PERIODIC, OPEN), (OPEN, PERIODIC), (PERIODIC, PERIODIC)]
BACKENDS = ["numba", "numpy"] if _accel.HAVE_NUMBA else ["numpy"]


@pytest.fixture(params=BACKENDS)
def kernel_backend(request):
    with _accel.backend(request.param):
        yield request.param


def random_battery(seed, count=20, max_nodes=100, t_max=50.0):
    """(spec, source, t) triples with at most ``max_nodes`` nodes."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        bc_x, bc_y = BC_PAIRS[rng.integers(len(BC_PAIRS))]
        M = int(rng.integers(3 if bc_x.is_periodic else 2, 11))
        N = int(rng.integers(3 if bc_y.is_periodic else 2, 11))
        if M * N > max_nodes:
            continue
        spec = LatticeSpec(M, N, bc_x, bc_y, gamma=float(rng.choice([1.0, 0.5, 2.3])))
        source = (int(rng.integers(1, M + 1)), int(rng.integers(1, N + 1)))
        out.append((spec, source, float(rng.uniform(0, t_max))))
    return out


_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance_report(request):
    """Record one pass/fail line per acceptance criterion.

    The line is printed immediately (visible with ``-s``) and repeated in the
    terminal summary so it also shows up in captured runs.
    """
    lines = request.config.stash[_ACCEPTANCE_KEY]

    def report(number, title, ok, detail=""):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}: {title}" + (f" ({detail})" if detail else "")
        print(line)
        lines.append(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
