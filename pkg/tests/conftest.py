import numpy as np
import pytest

from overlapiga.assembly import DofMap, ProblemSpec
from overlapiga.fixtures import load_config
from overlapiga.multimesh import MultiPatchUnion
from overlapiga.study import Solution

ACCEPTANCE = {}


def record(criterion, ok, detail):
    """Store one acceptance verdict; printed in the terminal summary."""
    ACCEPTANCE[criterion] = (bool(ok), detail)
    print('criterion %d: %s  %s' % (criterion, 'PASS' if ok else 'FAIL', detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section('acceptance criteria')
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line('criterion %d: %s  %s' % (k, 'PASS' if ok else 'FAIL', detail))


def union_of(name, level=0, degree=2):
    return MultiPatchUnion(load_config(name).patches(level, degree))


def interpolant(union, func, spec=None):
    """Discrete solution object holding the patchwise interpolant of ``func``."""
    dm = DofMap(union)
    u = np.zeros(dm.n)
    for i, patch in enumerate(union.patches):
        c = patch.interpolate(func)
        g = dm.glob[i]
        u[g[g >= 0]] = c[g >= 0]

    class _System:
        dofmap = dm

    return Solution(union, _System(), u, None, None)


@pytest.fixture(scope='session')
def square_union():
    return union_of('square', 0, 2)


@pytest.fixture(scope='session')
def three_patch_union():
    return union_of('three-patch', 2, 2)


@pytest.fixture(scope='session')
def disk_union():
    return union_of('disk-annulus-top', 0, 2)


@pytest.fixture
def spec_factory():
    def make(solution, **kw):
        return ProblemSpec(solution, **kw)
    return make
