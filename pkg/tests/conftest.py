import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mabsobs import GridSpec, SimConfig, Zone, init_simulation

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def place(config: SimConfig, positions):
    """A state whose agents stand exactly at ``positions``."""
    state = init_simulation(config)
    xs, ys = zip(*positions)
    state.x[:] = xs
    state.y[:] = ys
    cells = state.cells()
    if state.occupancy is not None:
        state.occupancy[:] = np.bincount(cells, minlength=config.grid.n_cells)
        state.zone_occupancy = int(config.zone.mask[cells].sum())
    if state.group is not None:
        state.group.mask[:] = config.zone.mask[cells]
        state.group.size = int(state.group.mask.sum())
    return state


@pytest.fixture
def grid():
    return GridSpec(100, 100)


@pytest.fixture
def band(grid):
    return Zone.with_coverage(grid, 0.2)


ACCEPTANCE_LINES: list[str] = []


def report(criterion: int, passed: bool, detail: str) -> bool:
    line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
