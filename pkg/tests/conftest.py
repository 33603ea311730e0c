import numpy as np
import pytest

from stokesmg.multigrid import MultigridSolver, build_hierarchy

ALPHAS = (1.0, 1e-6, 1e-12)


@pytest.fixture(scope="session")
def hierarchy3():
    return build_hierarchy(3)


@pytest.fixture(scope="session")
def solvers3(hierarchy3):
    return {a: MultigridSolver(hierarchy3, a) for a in ALPHAS}


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import ACCEPTANCE
    except ImportError:
        return
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in range(1, 9):
        if crit not in ACCEPTANCE:
            tr.write_line(f"criterion {crit}: NOT RUN")
            continue
        ok, detail = ACCEPTANCE[crit]
        tr.write_line(f"criterion {crit}: {'PASS' if ok else 'FAIL'}  {detail}")
