"""Observation strategies for the zone occupancy count Z.

Four ways of getting Z each step:

* brute force: probe every agent's position;
* indirect: read the occupancy trace agents leave in the environment;
* self-observation: agents run the join/leave rules on themselves while
  moving, the observer only reads the size of the resulting group;
* survey: probe a simple random sample and expand the hit count.

Each has a functional form (``observe_*``) and a small stateful observer
class used by the run loops. Observers never touch the simulation stream.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from . import _kernels
from .sampling import Sampler, SurveyPlan
from .sim import AgentState, ConfigurationError, Group, SimState, Zone


class ObservationMethod(enum.Enum):
    BRUTE_FORCE = "brute-force"
    INDIRECT = "indirect"
    SELF_OBSERVATION = "self-observation"
    SURVEY = "survey"
    ADAPTIVE = "adaptive"

    @property
    def exact(self) -> bool:
        return self in (ObservationMethod.BRUTE_FORCE, ObservationMethod.INDIRECT,
                        ObservationMethod.SELF_OBSERVATION)

    @classmethod
    def parse(cls, name: str) -> "ObservationMethod":
        key = name.strip().lower().replace("_", "-")
        aliases = {"brute": "brute-force", "bruteforce": "brute-force",
                   "self": "self-observation", "selfobservation": "self-observation"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ConfigurationError(f"unknown observation method {name!r}") from None

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Observation:
    step: int
    value: float
    method: ObservationMethod
    exact: bool
    cost_hint: float | None = None
    delegate: ObservationMethod | None = None


@dataclass(frozen=True)
class MembershipRules:
    """Join/leave predicates an agent evaluates on itself each step."""

    join_predicate: Callable[[AgentState, Zone, bool], bool]
    leave_predicate: Callable[[AgentState, Zone, bool], bool]


CASE_STUDY_RULES = MembershipRules(
    join_predicate=lambda agent, zone, member: agent.position in zone and not member,
    leave_predicate=lambda agent, zone, member: agent.position not in zone and member,
)


def apply_membership_rules(agent: AgentState, zone: Zone, group: Group,
                           rules: MembershipRules = CASE_STUDY_RULES) -> Group:
    """Reference (uncompiled) evaluation of the rule set for one agent.

    The stepping kernel applies the same pair of rules inline; this version
    exists for clarity and as a cross-check.
    """
    member = agent.id in group
    if rules.join_predicate(agent, zone, member):
        group.join(agent.id)
    elif rules.leave_predicate(agent, zone, member):
        group.leave(agent.id)
    return group


# -- filters ---------------------------------------------------------------

def zone_filter(state: SimState, ids: Iterable[int], zone: Zone | None = None) -> np.ndarray:
    """Ids among ``ids`` whose agent currently stands in ``zone``."""
    zone = state.zone if zone is None else zone
    ids = np.asarray(list(ids) if not isinstance(ids, np.ndarray) else ids, dtype=np.int64)
    if ids.size == 0:
        return ids
    return ids[zone.mask[state.x[ids] * state.grid.height + state.y[ids]]]


def group_filter(state: SimState, ids: Iterable[int]) -> np.ndarray:
    """Ids among ``ids`` that belong to the maintained group."""
    group = _require_group(state)
    ids = np.asarray(list(ids) if not isinstance(ids, np.ndarray) else ids, dtype=np.int64)
    return ids[group.mask[ids]] if ids.size else ids


# -- functional observers -------------------------------------------------

def observe_brute_force(state: SimState, zone: Zone | None = None) -> Observation:
    zone = state.zone if zone is None else zone
    value = _kernels.scan_count(state.x, state.y, zone.mask, state.grid.height)
    return Observation(state.step_index, value, ObservationMethod.BRUTE_FORCE, True)


def observe_indirect(state: SimState, zone: Zone | None = None) -> Observation:
    """Infer Z from the environment trace without touching agent records."""
    zone = state.zone if zone is None else zone
    if state.occupancy is None:
        raise ConfigurationError(
            "indirect observation needs the occupancy trace; enable SimConfig.trace")
    if zone is state.zone or zone == state.zone:
        value = state.zone_occupancy
    else:
        value = int(_kernels.sum_cells(state.occupancy, zone.flat_cells))
    return Observation(state.step_index, value, ObservationMethod.INDIRECT, True)


def observe_self(state: SimState) -> Observation:
    group = _require_group(state)
    return Observation(state.step_index, group.size, ObservationMethod.SELF_OBSERVATION, True)


def observe_survey(state: SimState, plan: SurveyPlan, obs_rng: np.random.Generator,
                   zone: Zone | None = None) -> Observation:
    return SurveyObserver(state, plan, obs_rng, zone).observe(state)


def _require_group(state: SimState) -> Group:
    if state.group is None:
        raise ConfigurationError(
            "self-observation needs the membership rules; enable SimConfig.membership")
    return state.group


# -- stateful observers used by run loops ---------------------------------

class BruteForceObserver:
    method = ObservationMethod.BRUTE_FORCE

    def __init__(self, state: SimState, zone: Zone | None = None):
        self.zone = state.zone if zone is None else zone

    def value(self, state: SimState) -> int:
        return _kernels.scan_count(state.x, state.y, self.zone.mask, state.grid.height)

    def observe(self, state: SimState) -> Observation:
        return Observation(state.step_index, self.value(state), self.method, True)


class IndirectObserver:
    method = ObservationMethod.INDIRECT

    def __init__(self, state: SimState, zone: Zone | None = None):
        if state.occupancy is None:
            raise ConfigurationError(
                "indirect observation needs the occupancy trace; enable SimConfig.trace")
        self.zone = state.zone if zone is None else zone
        self._registered = self.zone == state.zone

    def value(self, state: SimState) -> int:
        if self._registered:
            return state.zone_occupancy
        return int(_kernels.sum_cells(state.occupancy, self.zone.flat_cells))

    def observe(self, state: SimState) -> Observation:
        return Observation(state.step_index, self.value(state), self.method, True)


class SelfObserver:
    method = ObservationMethod.SELF_OBSERVATION

    def __init__(self, state: SimState):
        _require_group(state)

    def value(self, state: SimState) -> int:
        return state.group.size

    def observe(self, state: SimState) -> Observation:
        return Observation(state.step_index, state.group.size, self.method, True)


class SurveyObserver:
    method = ObservationMethod.SURVEY

    def __init__(self, state: SimState, plan: SurveyPlan, obs_rng: np.random.Generator,
                 zone: Zone | None = None):
        if plan.population != state.n_agents:
            raise ConfigurationError(
                f"survey plan sized for {plan.population} agents, state has {state.n_agents}")
        self.plan = plan
        self.zone = state.zone if zone is None else zone
        self.sampler = Sampler(state.n_agents, obs_rng)

    def value(self, state: SimState) -> float:
        n = self.plan.n
        hits = self.sampler.count_hits(n, state.x, state.y, self.zone.mask, state.grid.height)
        return state.n_agents * hits / n

    def observe(self, state: SimState) -> Observation:
        return Observation(state.step_index, self.value(state), self.method, False)


def sim_requirements(method: ObservationMethod | None) -> dict[str, bool]:
    """Which optional bookkeeping a method needs from the simulation."""
    return {
        "trace": method is ObservationMethod.INDIRECT,
        "membership": method is ObservationMethod.SELF_OBSERVATION,
    }


def make_observer(method: ObservationMethod, state: SimState,
                  obs_rng: np.random.Generator | None = None,
                  plan: SurveyPlan | None = None):
    if method is ObservationMethod.BRUTE_FORCE:
        return BruteForceObserver(state)
    if method is ObservationMethod.INDIRECT:
        return IndirectObserver(state)
    if method is ObservationMethod.SELF_OBSERVATION:
        return SelfObserver(state)
    if method is ObservationMethod.SURVEY:
        if plan is None or obs_rng is None:
            raise ConfigurationError("survey observation needs a plan and an observer stream")
        return SurveyObserver(state, plan, obs_rng)
    raise ConfigurationError(f"no plain observer for {method}; see mabsobs.adaptive")


# -- CSV sink -------------------------------------------------------------

OBSERVATION_COLUMNS = ("step", "method", "value", "exact", "elapsed_ns")


class ObservationCSVSink:
    """Append observations to a CSV file, one row per observation.

    ``elapsed_ns`` is left blank when no cost hint was recorded, which keeps
    files from repeated exact runs byte-identical.
    """

    def __init__(self, path, mode: str = "w"):
        self._fh = open(path, mode, newline="")
        self._writer = csv.writer(self._fh, lineterminator="\n")
        if mode == "w":
            self._writer.writerow(OBSERVATION_COLUMNS)

    def write(self, obs: Observation) -> None:
        method = str(obs.method) if obs.delegate is None else f"{obs.method}:{obs.delegate}"
        value = repr(float(obs.value)) if not obs.exact else str(int(obs.value))
        elapsed = "" if obs.cost_hint is None else str(int(obs.cost_hint))
        self._writer.writerow((obs.step, method, value, int(obs.exact), elapsed))

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_observations(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
