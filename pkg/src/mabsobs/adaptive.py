"""Pick the observation method at run time from a calibration map.

The rate used to query the map is either a configured constant (the
expected E(Z)/N) or a running estimate: an exponential moving average of
observed Z/N. A hysteresis setting limits how often the method may change.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .maps import CalibrationMap
from .observers import (BruteForceObserver, IndirectObserver, Observation, ObservationMethod,
                        SelfObserver, SurveyObserver)
from .sampling import SurveyPlan
from .sim import ConfigurationError, SimState

__all__ = ["AdaptivePolicy", "AdaptiveObserver", "CalibrationMap", "adaptive_observe",
           "select_method"]


def select_method(cmap: CalibrationMap, N: float, p: float) -> ObservationMethod:
    """Label of the node nearest to (N, p), axis by axis.

    Equidistant queries go to the smaller axis value.
    """
    if cmap is None or cmap.n_axis.size == 0 or cmap.p_axis.size == 0:
        raise ValueError("calibration map is empty")
    j = int(np.argmin(np.abs(cmap.n_axis - N)))
    i = int(np.argmin(np.abs(cmap.p_axis - p)))
    return cmap.labels[i][j]


@dataclass(frozen=True)
class AdaptivePolicy:
    map: CalibrationMap
    p: float = 0.2
    p_mode: str = "constant"
    smoothing: float = 0.1
    switch_hysteresis: int = 0
    always_run_rules: bool = False

    def __post_init__(self):
        if self.p_mode not in ("constant", "running"):
            raise ConfigurationError(f"p_mode must be 'constant' or 'running', got {self.p_mode!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ConfigurationError(f"rate must lie in [0, 1], got {self.p}")
        if not 0.0 < self.smoothing <= 1.0:
            raise ConfigurationError("smoothing must lie in (0, 1]")
        if self.switch_hysteresis < 0:
            raise ConfigurationError("hysteresis must be non-negative")

    def needs_group(self, n_agents: int) -> bool:
        """Whether self-observation can ever be chosen for this population.

        With a constant rate and a fixed population the choice never
        changes, so the group is only kept when it is the choice.
        ``always_run_rules`` keeps it regardless, at the price of the rule
        cost on every step.
        """
        if self.always_run_rules:
            return True
        if self.p_mode == "constant":
            return select_method(self.map, n_agents, self.p) is ObservationMethod.SELF_OBSERVATION
        return ObservationMethod.SELF_OBSERVATION in self.map.methods()


class AdaptiveObserver:
    method = ObservationMethod.ADAPTIVE

    def __init__(self, state: SimState, policy: AdaptivePolicy,
                 obs_rng: np.random.Generator, survey_d: float = 0.08):
        self.policy = policy
        self.obs_rng = obs_rng
        self.survey_d = survey_d
        self.n_agents = state.n_agents
        self.p = policy.p
        self.running = policy.p_mode == "running"
        if policy.needs_group(state.n_agents) and state.group is None:
            raise ConfigurationError(
                "the map can select self-observation; enable SimConfig.membership")
        self._state = state
        self._delegates: dict[ObservationMethod, object] = {}
        self.current: ObservationMethod | None = None
        self._since_switch = 0
        self.switches: list[tuple[int, ObservationMethod]] = []
        # with a constant rate the first choice is final; skip the lookup after it
        self._fixed_value = None
        self._exact = True

    def _delegate(self, method: ObservationMethod):
        obs = self._delegates.get(method)
        if obs is not None:
            if method is ObservationMethod.SURVEY and self.running:
                self._resize_survey(obs)
            return obs
        state = self._state
        if method is ObservationMethod.BRUTE_FORCE:
            obs = BruteForceObserver(state)
        elif method is ObservationMethod.SELF_OBSERVATION:
            obs = SelfObserver(state)
        elif method is ObservationMethod.INDIRECT:
            obs = IndirectObserver(state)
        elif method is ObservationMethod.SURVEY:
            plan = SurveyPlan.design(self.n_agents, self.p, self.survey_d)
            obs = SurveyObserver(state, plan, self.obs_rng)
        else:
            raise ConfigurationError(f"map label {method} cannot be delegated to")
        self._delegates[method] = obs
        return obs

    def _resize_survey(self, obs: SurveyObserver) -> None:
        if abs(obs.plan.p_expected - self.p) > 0.01:
            obs.plan = obs.plan.resized(self.p)

    def choose(self, step_index: int) -> ObservationMethod:
        if self.current is None or self.running:
            target = select_method(self.policy.map, self.n_agents, self.p)
        else:
            target = self.current
        if self.current is None:
            self.current = target
            self.switches.append((step_index, target))
            self._since_switch = 0
        elif target is not self.current and self._since_switch >= self.policy.switch_hysteresis:
            self.current = target
            self.switches.append((step_index, target))
            self._since_switch = 0
        return self.current

    def value(self, state: SimState) -> float:
        if self._fixed_value is not None:
            return self._fixed_value(state)
        method = self.choose(state.step_index)
        self._exact = method.exact
        delegate = self._delegate(method)
        if not self.running:
            self._fixed_value = delegate.value
        value = delegate.value(state)
        self._since_switch += 1
        if self.running:
            self.p += self.policy.smoothing * (value / self.n_agents - self.p)
            self.p = min(max(self.p, 0.0), 1.0)
        return value

    def observe(self, state: SimState) -> Observation:
        value = self.value(state)
        return Observation(state.step_index, value, self.method, self._exact,
                           delegate=self.current)


def adaptive_observe(state: SimState, policy: AdaptivePolicy,
                     obs_rng: np.random.Generator, survey_d: float = 0.08) -> Observation:
    """One-shot adaptive observation of ``state``.

    Run loops should keep an :class:`AdaptiveObserver` instead, so that
    hysteresis and the running rate estimate persist across steps.
    """
    return AdaptiveObserver(state, policy, obs_rng, survey_d).observe(state)
