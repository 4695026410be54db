import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mabsobs import (ConfigurationError, GridSpec, SimConfig, Zone, ground_truth_count,
                     init_simulation, move, step)
from mabsobs._kernels import MOORE_DX, MOORE_DY


def test_single_cell_grid_holds_the_only_agent():
    grid = GridSpec(1, 1)
    state = init_simulation(SimConfig(grid=grid, zone=Zone.everywhere(grid), agents=1))
    assert state.agent(0).position == (0, 0)
    assert state.occupancy[0] == 1


def test_zone_covering_everything_contains_all_agents():
    grid = GridSpec(7, 3)
    state = init_simulation(SimConfig(grid=grid, zone=Zone.everywhere(grid), agents=4))
    assert state.zone_occupancy == 4
    assert state.group.size == 4


def test_initial_placement_matches_binomial():
    # 2000 of 10000 cells: the in-zone count at t=0 is Binomial(N, 0.2)
    grid = GridSpec(100, 100)
    zone = Zone.rectangle(grid, 0, 0, 20, 100)
    n = 10_000
    counts = [init_simulation(SimConfig(grid=grid, zone=zone, agents=n, seed=s)).zone_occupancy
              for s in range(200)]
    sigma = np.sqrt(n * 0.2 * 0.8)
    # the mean of 200 draws has standard error sigma / sqrt(200)
    assert abs(np.mean(counts) - 2000) <= 3 * sigma / np.sqrt(200)
    assert abs(np.std(counts) - sigma) < 0.2 * sigma


def test_forced_up_left_move_wraps_to_far_corner():
    grid = GridSpec(100, 100)
    state = init_simulation(SimConfig(grid=grid, agents=1))
    state.x[0] = state.y[0] = 0
    state.occupancy[:] = 0
    state.occupancy[0] = 1
    up_left = int(np.flatnonzero((MOORE_DX == -1) & (MOORE_DY == -1))[0])
    move(state, np.array([up_left]))
    assert state.agent(0).position == (99, 99)
    assert state.occupancy[99 * 100 + 99] == 1
    assert state.occupancy.sum() == 1


def test_moore_offsets_exclude_staying_put():
    offsets = set(zip(MOORE_DX.tolist(), MOORE_DY.tolist()))
    assert len(offsets) == 8
    assert (0, 0) not in offsets


def test_every_direction_is_taken_uniformly():
    state = init_simulation(SimConfig(agents=40_000, seed=5, trace=False, membership=False))
    x0, y0 = state.x.copy(), state.y.copy()
    step(state)
    dx = (state.x - x0 + 1) % 100 - 1
    dy = (state.y - y0 + 1) % 100 - 1
    codes = (dx + 1) * 3 + (dy + 1)
    freq = np.bincount(codes, minlength=9)
    assert freq[4] == 0  # (0, 0)
    expected = 40_000 / 8
    assert np.all(np.abs(np.delete(freq, 4) - expected) < 5 * np.sqrt(expected * 7 / 8))


def test_bad_direction_codes_are_rejected():
    state = init_simulation(SimConfig(agents=3))
    with pytest.raises(ValueError):
        move(state, np.array([0, 8, 1]))
    with pytest.raises(ValueError):
        move(state, np.array([0, 1]))


@pytest.mark.parametrize("kwargs", [dict(agents=0), dict(steps=0),
                                    dict(movement_rule="von-neumann")])
def test_invalid_configs_are_rejected(kwargs):
    with pytest.raises(ConfigurationError):
        SimConfig(**kwargs)


def test_empty_grid_and_foreign_zone_are_rejected():
    with pytest.raises(ConfigurationError):
        GridSpec(0, 10)
    with pytest.raises(ConfigurationError):
        SimConfig(grid=GridSpec(10, 10), zone=Zone.everywhere(GridSpec(5, 5)))
    with pytest.raises(ConfigurationError):
        Zone.rectangle(GridSpec(10, 10), 0, 0, 11, 3)


def test_ground_truth_by_enumeration():
    grid = GridSpec(100, 100)
    zone = Zone(grid, [(0, 0), (5, 5)])
    state = init_simulation(SimConfig(grid=grid, zone=zone, agents=3))
    state.x[:] = [0, 5, 99]
    state.y[:] = [0, 5, 99]
    assert ground_truth_count(state, zone) == 2
    assert ground_truth_count(state, Zone.empty(grid)) == 0
    assert ground_truth_count(state, Zone.everywhere(grid)) == 3


def test_coverage_band_sizes():
    grid = GridSpec(100, 100)
    for p in (0.05, 0.2, 0.9):
        zone = Zone.with_coverage(grid, p)
        assert len(zone) == round(p * 100) * 100
        assert zone.coverage == pytest.approx(p)
    assert (0, 0) in Zone.with_coverage(grid, 0.2)
    assert (0, 20) not in Zone.with_coverage(grid, 0.2)


configs = st.builds(
    lambda w, h, n, seed, rect: (w, h, n, seed, rect),
    st.integers(1, 30), st.integers(1, 30), st.integers(1, 1000), st.integers(0, 2**32),
    st.tuples(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1)))


def _config(w, h, n, seed, rect, **kw):
    grid = GridSpec(w, h)
    xs = sorted(int(f * w) for f in rect[:2])
    ys = sorted(int(f * h) for f in rect[2:])
    zone = Zone.rectangle(grid, xs[0], ys[0], xs[1], ys[1])
    return SimConfig(grid=grid, zone=zone, agents=n, seed=seed, steps=100, **kw)


@given(configs)
def test_conservation_and_incremental_consistency(params):
    config = _config(*params)
    state = init_simulation(config)
    for _ in range(100):
        step(state)
        assert state.occupancy.sum() == config.agents
        assert state.x.min() >= 0 and state.x.max() < config.grid.width
        assert state.y.min() >= 0 and state.y.max() < config.grid.height
        assert state.zone_occupancy == ground_truth_count(state, config.zone)
    assert np.array_equal(state.occupancy,
                          np.bincount(state.cells(), minlength=config.grid.n_cells))


@given(configs)
def test_identical_configs_give_identical_runs(params):
    config = _config(*params)
    a, b = init_simulation(config), init_simulation(config)
    for _ in range(30):
        step(a)
        step(b)
        assert a.zone_occupancy == b.zone_occupancy
    assert a.trajectory_digest() == b.trajectory_digest()


def test_bookkeeping_switches_do_not_change_trajectories():
    digests = set()
    for trace in (False, True):
        for membership in (False, True):
            state = init_simulation(SimConfig(agents=300, seed=11, trace=trace,
                                              membership=membership))
            for _ in range(40):
                step(state)
            digests.add(state.trajectory_digest())
    assert len(digests) == 1


def test_time_average_of_rate_matches_coverage():
    # uniform distribution is stationary for the torus walk
    state = init_simulation(SimConfig(agents=10_000, seed=1, membership=False))
    total = 0
    steps = 10_000
    for _ in range(steps):
        step(state)
        total += state.zone_occupancy
    assert abs(total / steps / 10_000 - 0.2) < 0.01
