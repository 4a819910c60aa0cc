import numpy as np
import pytest

from lsfm.grid import make_grid
from lsfm.phantom import PhantomSpec, make_phantom


@pytest.fixture(scope="session")
def small_grid():
    return make_grid(33)


@pytest.fixture(scope="session")
def small_phantom(small_grid):
    maps, mask = make_phantom(PhantomSpec(lambda_bg=0.8, edge_width=0.1, puncta=2.0), small_grid)
    return maps, mask


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    """Print the acceptance verdicts, one line per criterion, in order."""
    import sys

    results = {}
    for name, mod in list(sys.modules.items()):
        if name.rsplit(".", 1)[-1] == "test_acceptance":
            results.update(getattr(mod, "RESULTS", {}))
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
