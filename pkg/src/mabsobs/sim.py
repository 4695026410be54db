"""Random-walk case study: N agents on a toroidal grid, one observed zone.

Agents live in struct-of-arrays form (``x``, ``y``) and are stepped by a
compiled per-agent loop. Two optional pieces of bookkeeping ride along with
the movement:

* the environment *trace*: per-cell occupancy counters plus a running count
  of agents inside the configured zone (what indirect observation reads);
* the *membership* rules: each agent, after moving, joins or leaves the
  group ``G`` of in-zone agents (what self-observation reads).

Both are switchable so that timing runs only pay for what they use. The
random stream driving the agents is independent from any observer stream,
so trajectories do not depend on which observers are attached.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator

import numpy as np

from . import _kernels


class ConfigurationError(ValueError):
    """Invalid simulation, observer or plan configuration."""


@dataclass(frozen=True)
class GridSpec:
    width: int = 100
    height: int = 100
    topology: str = "torus"

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ConfigurationError(
                f"grid must have at least one cell, got {self.width}x{self.height}")
        if self.topology != "torus":
            raise ConfigurationError(f"unsupported topology {self.topology!r}")

    @property
    def n_cells(self) -> int:
        return self.width * self.height

    def flat(self, x, y):
        return x * self.height + y


class Zone:
    """A set of grid cells with constant-time membership lookups.

    Holds the cells three ways: a frozenset of ``(x, y)`` pairs, a boolean
    mask over flattened cells, and the sorted flat indices.
    """

    def __init__(self, grid: GridSpec, cells: Iterable[tuple[int, int]]):
        self.grid = grid
        member_cells = frozenset((int(cx), int(cy)) for cx, cy in cells)
        for cx, cy in member_cells:
            if not (0 <= cx < grid.width and 0 <= cy < grid.height):
                raise ConfigurationError(f"zone cell {(cx, cy)} lies outside the grid")
        self.member_cells = member_cells
        flat = np.fromiter((cx * grid.height + cy for cx, cy in member_cells),
                           dtype=np.int64, count=len(member_cells))
        flat.sort()
        self.flat_cells = flat
        self.mask = np.zeros(grid.n_cells, dtype=np.bool_)
        self.mask[flat] = True

    @classmethod
    def rectangle(cls, grid: GridSpec, x0: int, y0: int, x1: int, y1: int) -> "Zone":
        """Cells with ``x0 <= x < x1`` and ``y0 <= y < y1``."""
        if not (0 <= x0 <= x1 <= grid.width and 0 <= y0 <= y1 <= grid.height):
            raise ConfigurationError(
                f"rectangle [{x0},{x1})x[{y0},{y1}) does not fit a "
                f"{grid.width}x{grid.height} grid")
        return cls(grid, ((cx, cy) for cx in range(x0, x1) for cy in range(y0, y1)))

    @classmethod
    def with_coverage(cls, grid: GridSpec, rate: float) -> "Zone":
        """Full-width band of ``round(rate * height)`` rows starting at y = 0.

        At stationarity the expected share of agents inside equals the
        coverage, so this is how an expected rate E(Z)/N is dialled in.
        """
        if not 0.0 <= rate <= 1.0:
            raise ConfigurationError(f"coverage rate must lie in [0, 1], got {rate}")
        rows = int(round(rate * grid.height))
        return cls.rectangle(grid, 0, 0, grid.width, rows)

    @classmethod
    def everywhere(cls, grid: GridSpec) -> "Zone":
        return cls.rectangle(grid, 0, 0, grid.width, grid.height)

    @classmethod
    def empty(cls, grid: GridSpec) -> "Zone":
        return cls(grid, ())

    @property
    def coverage(self) -> float:
        return len(self.member_cells) / self.grid.n_cells

    def __contains__(self, cell) -> bool:
        return tuple(cell) in self.member_cells

    def __len__(self) -> int:
        return len(self.member_cells)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Zone):
            return NotImplemented
        return self.grid == other.grid and self.member_cells == other.member_cells

    def __hash__(self):
        return hash((self.grid, self.member_cells))

    def __repr__(self):
        return f"Zone({len(self)} cells, coverage={self.coverage:.3f})"


@dataclass(frozen=True)
class AgentState:
    id: int
    position: tuple[int, int]


class Group:
    """Agents currently in the observed group: a dense mask plus its size."""

    def __init__(self, n_agents: int):
        self.mask = np.zeros(n_agents, dtype=np.bool_)
        self.size = 0

    def join(self, agent_id: int) -> None:
        if not self.mask[agent_id]:
            self.mask[agent_id] = True
            self.size += 1

    def leave(self, agent_id: int) -> None:
        if self.mask[agent_id]:
            self.mask[agent_id] = False
            self.size -= 1

    def ids(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    def __contains__(self, agent_id) -> bool:
        return bool(self.mask[agent_id])

    def __len__(self) -> int:
        return self.size


@dataclass(frozen=True)
class SimConfig:
    grid: GridSpec = field(default_factory=GridSpec)
    zone: Zone | None = None
    agents: int = 1000
    steps: int = 1000
    seed: int = 0
    movement_rule: str = "moore-uniform"
    trace: bool = True
    membership: bool = True

    def __post_init__(self):
        if self.agents < 1:
            raise ConfigurationError(f"need at least one agent, got {self.agents}")
        if self.steps < 1:
            raise ConfigurationError(f"need at least one step, got {self.steps}")
        if self.movement_rule != "moore-uniform":
            raise ConfigurationError(f"unknown movement rule {self.movement_rule!r}")
        if self.zone is None:
            object.__setattr__(self, "zone", Zone.with_coverage(self.grid, 0.2))
        elif self.zone.grid != self.grid:
            raise ConfigurationError("zone was built for a different grid")

    def replace(self, **changes) -> "SimConfig":
        return replace(self, **changes)


def streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent (simulation, observer) random streams for one seed."""
    sim_seq, obs_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(sim_seq), np.random.default_rng(obs_seq)


class SimState:
    """Mutable state of one run. Confined to a single thread."""

    def __init__(self, config: SimConfig, x: np.ndarray, y: np.ndarray,
                 sim_rng: np.random.Generator):
        self.config = config
        self.grid = config.grid
        self.zone = config.zone
        self.x = x
        self.y = y
        self.sim_rng = sim_rng
        self.step_index = 0
        self.occupancy: np.ndarray | None = None
        self.zone_occupancy: int | None = None
        self.group: Group | None = None

    @property
    def n_agents(self) -> int:
        return self.x.shape[0]

    @property
    def tracing(self) -> bool:
        return self.occupancy is not None

    def cells(self) -> np.ndarray:
        return self.x * self.grid.height + self.y

    def agent(self, agent_id: int) -> AgentState:
        return AgentState(agent_id, (int(self.x[agent_id]), int(self.y[agent_id])))

    @property
    def agents(self) -> Iterator[AgentState]:
        for i in range(self.n_agents):
            yield self.agent(i)

    def trajectory_digest(self) -> str:
        """Hash of the current positions; equal digests mean equal layouts."""
        import hashlib

        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.x, dtype=np.int64).tobytes())
        h.update(np.ascontiguousarray(self.y, dtype=np.int64).tobytes())
        return h.hexdigest()


def init_simulation(config: SimConfig, sim_rng: np.random.Generator | None = None) -> SimState:
    """Place agents uniformly at random and set up the optional bookkeeping."""
    grid = config.grid
    if sim_rng is None:
        sim_rng, _ = streams(config.seed)
    x = sim_rng.integers(0, grid.width, config.agents, dtype=np.int64)
    y = sim_rng.integers(0, grid.height, config.agents, dtype=np.int64)
    state = SimState(config, x, y, sim_rng)
    cells = state.cells()
    zone_mask = config.zone.mask
    if config.trace:
        state.occupancy = np.bincount(cells, minlength=grid.n_cells).astype(np.int64)
        state.zone_occupancy = int(np.count_nonzero(zone_mask[cells]))
    if config.membership:
        # One rule pass from an empty group: exactly the in-zone agents join.
        state.group = Group(config.agents)
        state.group.mask[:] = zone_mask[cells]
        state.group.size = int(np.count_nonzero(state.group.mask))
    return state


def move(state: SimState, directions: np.ndarray) -> SimState:
    """Move every agent along the given Moore direction codes (0..7)."""
    directions = np.asarray(directions, dtype=np.uint8)
    if directions.shape != (state.n_agents,):
        raise ValueError("need exactly one direction per agent")
    if directions.size and directions.max() > 7:
        raise ValueError("direction codes must lie in 0..7")
    return _advance(state, directions)


def _advance(state: SimState, directions: np.ndarray) -> SimState:
    track = state.occupancy is not None
    group = state.group
    mover = _kernels.MOVERS[track, group is not None]
    zone_occ, group_size = mover(
        state.x, state.y, directions, _kernels.MOORE_DX, _kernels.MOORE_DY,
        state.grid.width, state.grid.height,
        state.occupancy if track else _NO_INTS, state.zone.mask,
        state.zone_occupancy if track else 0,
        _NO_BOOLS if group is None else group.mask,
        0 if group is None else group.size,
    )
    if track:
        state.zone_occupancy = int(zone_occ)
    if group is not None:
        group.size = int(group_size)
    state.step_index += 1
    return state


def step(state: SimState) -> SimState:
    """Each agent, in id order, moves to a uniformly chosen Moore neighbour."""
    return _advance(state, state.sim_rng.integers(0, 8, state.n_agents, dtype=np.uint8))


def ground_truth_count(state: SimState, zone: Zone) -> int:
    """Reference value of Z by enumeration against the zone's cell list.

    Deliberately avoids the zone mask that the observers use.
    """
    if len(zone) == 0:
        return 0
    cells = state.x * zone.grid.height + state.y
    return int(np.isin(cells, zone.flat_cells, assume_unique=False).sum())


_NO_INTS = np.zeros(0, dtype=np.int64)
_NO_BOOLS = np.zeros(0, dtype=np.bool_)
