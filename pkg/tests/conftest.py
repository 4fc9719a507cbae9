import pytest

from levymult import (
    AtomsMeasure,
    Modulator,
    gaussian_bump,
    make_data,
    table_mod,
)


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance criteria pass/fail lines past output capture."""
    import sys

    mod = sys.modules.get("test_acceptance") \
        or sys.modules.get("tests.test_acceptance")
    if mod is not None and getattr(mod, "RESULT_LINES", None):
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(mod.RESULT_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def single_atom_data():
    """One unit-mass atom at z = 1, identity maps, no drift."""
    return make_data(AtomsMeasure([[1.0]], [1.0]), A=[[1.0]], B=[[1.0]])


@pytest.fixture
def mixed_atoms_data():
    """Three atoms (one inside the unit ball, so the net drift is nonzero), A != B."""
    nu = AtomsMeasure([[1.0], [-2.0], [0.5]], [0.7, 0.3, 0.4])
    return make_data(nu, A=[[1.0]], B=[[-1.0]])


@pytest.fixture
def complex_phi():
    return Modulator(phi=table_mod([0.5, -0.8j, 0.3 + 0.4j]))


@pytest.fixture
def bump_f():
    return gaussian_bump(40.0, 1024, 1, center=[0.5], width=0.9)


@pytest.fixture
def bump_g():
    return gaussian_bump(40.0, 1024, 1, center=[-0.3], width=1.1)
