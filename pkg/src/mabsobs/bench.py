"""Wall-clock cost of observed runs over a grid of (N, p).

A full simulation run, observed at every step, is the unit of measurement.
Replicates use fresh seeds derived from the scenario seed; each scenario
gets one untimed warm-up run; summaries use the median. Runs are timed
strictly one after another, never concurrently.
"""

from __future__ import annotations

import csv
import datetime as _dt
import gc
import os
import platform
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .adaptive import AdaptiveObserver, AdaptivePolicy
from .maps import CalibrationMap
from .observers import Observation, ObservationMethod, make_observer, sim_requirements
from .sampling import SurveyPlan
from .sim import ConfigurationError, GridSpec, SimConfig, SimState, Zone, init_simulation, step, streams
from .surfaces import SurfaceData

DEFAULT_N_VALUES = tuple(range(2000, 20001, 2000))
DEFAULT_P_VALUES = (0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
MAP_METHODS = (ObservationMethod.BRUTE_FORCE, ObservationMethod.SELF_OBSERVATION,
               ObservationMethod.SURVEY)
# exact methods win ties, brute force first
TIE_PRIORITY = {ObservationMethod.BRUTE_FORCE: 0, ObservationMethod.SELF_OBSERVATION: 1,
                ObservationMethod.INDIRECT: 2, ObservationMethod.SURVEY: 3,
                ObservationMethod.ADAPTIVE: 4}


class MissingMeasurementError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    sim: SimConfig
    method: ObservationMethod | None
    survey: SurveyPlan | None = None
    replicates: int = 5
    policy: AdaptivePolicy | None = None

    def __post_init__(self):
        if self.replicates < 1:
            raise ConfigurationError("replicates must be positive")
        wants_plan = self.method in (ObservationMethod.SURVEY, ObservationMethod.ADAPTIVE)
        if self.method is ObservationMethod.SURVEY and self.survey is None:
            raise ConfigurationError("a survey scenario needs a survey plan")
        if self.survey is not None and not wants_plan:
            raise ConfigurationError(f"survey plan given for method {self.method}")
        if self.method is ObservationMethod.ADAPTIVE and self.policy is None:
            raise ConfigurationError("an adaptive scenario needs a policy")

    @property
    def n_agents(self) -> int:
        return self.sim.agents

    @property
    def rate(self) -> float:
        return self.sim.zone.coverage

    @property
    def method_name(self) -> str:
        return "none" if self.method is None else str(self.method)


@dataclass
class TimingRecord:
    scenario: Scenario
    elapsed: list[float] = field(default_factory=list)

    @property
    def median(self) -> float:
        return float(np.median(self.elapsed))

    @property
    def iqr(self) -> float:
        q1, q3 = np.percentile(self.elapsed, [25, 75])
        return float(q3 - q1)

    def summary(self) -> dict:
        s = self.scenario
        return {"method": s.method_name, "agents": s.n_agents, "rate": s.rate,
                "replicates": len(self.elapsed), "median_s": self.median, "iqr_s": self.iqr}


# -- one observed run ------------------------------------------------------

def build_observer(state: SimState, method: ObservationMethod | None,
                   obs_rng: np.random.Generator, survey: SurveyPlan | None = None,
                   policy: AdaptivePolicy | None = None):
    if method is None:
        return None
    if method is ObservationMethod.ADAPTIVE:
        d = survey.d if survey is not None else 0.08
        return AdaptiveObserver(state, policy, obs_rng, survey_d=d)
    return make_observer(method, state, obs_rng, survey)


def prepare_config(config: SimConfig, method: ObservationMethod | None,
                   policy: AdaptivePolicy | None = None) -> SimConfig:
    """Switch on only the bookkeeping the method relies on."""
    if method is ObservationMethod.ADAPTIVE:
        return config.replace(trace=False, membership=policy.needs_group(config.agents))
    return config.replace(**sim_requirements(method))


def run_once(config: SimConfig, method: ObservationMethod | None,
             survey: SurveyPlan | None = None, policy: AdaptivePolicy | None = None,
             on_observation: Callable[[Observation], None] | None = None) -> SimState:
    """Run ``config.steps`` steps, observing after each one."""
    sim_rng, obs_rng = streams(config.seed)
    state = init_simulation(config, sim_rng)
    observer = build_observer(state, method, obs_rng, survey, policy)
    if observer is None:
        for _ in range(config.steps):
            step(state)
    elif on_observation is None:
        observe = observer.observe
        for _ in range(config.steps):
            step(state)
            observe(state)
    else:
        for _ in range(config.steps):
            step(state)
            on_observation(observer.observe(state))
    return state


def _replicate_seeds(seed: int, count: int) -> list[int]:
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(count, dtype=np.uint64)]


def _timed(scenario: Scenario, seed: int) -> float:
    config = prepare_config(scenario.sim, scenario.method, scenario.policy).replace(seed=seed)
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        t0 = time.perf_counter_ns()
        run_once(config, scenario.method, scenario.survey, scenario.policy)
        t1 = time.perf_counter_ns()
    finally:
        if gc_was_enabled:
            gc.enable()
    return (t1 - t0) * 1e-9


def time_scenarios(scenarios: Sequence[Scenario], warmup: bool = True,
                   on_sample: Callable[[Scenario, int, float], None] | None = None
                   ) -> list[TimingRecord]:
    """Time several scenarios, interleaving their replicates.

    Interleaving spreads slow drifts of the machine evenly over the
    scenarios being compared.
    """
    records = [TimingRecord(s) for s in scenarios]
    seeds = [_replicate_seeds(s.sim.seed, s.replicates + 1) for s in scenarios]
    if warmup:
        for s, sd in zip(scenarios, seeds):
            _timed(s, sd[-1])
    for r in range(max(s.replicates for s in scenarios)):
        for s, rec, sd in zip(scenarios, records, seeds):
            if r < s.replicates:
                elapsed = _timed(s, sd[r])
                rec.elapsed.append(elapsed)
                if on_sample is not None:
                    on_sample(s, r, elapsed)
    return records


def time_run(scenario: Scenario, warmup: bool = True) -> TimingRecord:
    return time_scenarios([scenario], warmup=warmup)[0]


# -- calibration grid ------------------------------------------------------

@dataclass(frozen=True)
class CalibrationPlan:
    n_values: tuple[int, ...] = DEFAULT_N_VALUES
    p_values: tuple[float, ...] = DEFAULT_P_VALUES
    methods: tuple[ObservationMethod, ...] = MAP_METHODS
    replicates: int = 5
    steps: int = 1000
    seed: int = 0
    survey_d: float = 0.08
    grid: GridSpec = field(default_factory=GridSpec)

    def __post_init__(self):
        if not self.n_values or not self.p_values or not self.methods:
            raise ConfigurationError("plan needs at least one N, one p and one method")
        for a, name in ((self.n_values, "n_values"), (self.p_values, "p_values")):
            if any(b <= a_ for a_, b in zip(a, a[1:])):
                raise ConfigurationError(f"{name} must be strictly increasing")
        if ObservationMethod.ADAPTIVE in self.methods:
            raise ConfigurationError("the adaptive observer is not calibrated, it consumes the map")

    def scenarios(self, n: int, p: float) -> list[Scenario]:
        zone = Zone.with_coverage(self.grid, p)
        sim = SimConfig(grid=self.grid, zone=zone, agents=n, steps=self.steps,
                        seed=self.seed + 1_000_003 * n + int(round(p * 1e6)))
        out = []
        for m in self.methods:
            plan = SurveyPlan.design(n, zone.coverage, self.survey_d) \
                if m is ObservationMethod.SURVEY else None
            out.append(Scenario(sim, m, plan, self.replicates))
        return out

    def to_dict(self) -> dict:
        return {"n_values": list(self.n_values), "p_values": list(self.p_values),
                "methods": [str(m) for m in self.methods], "replicates": self.replicates,
                "steps": self.steps, "seed": self.seed, "survey_d": self.survey_d,
                "grid": [self.grid.width, self.grid.height]}


def run_calibration(plan: CalibrationPlan,
                    on_record: Callable[[TimingRecord], None] | None = None,
                    on_sample: Callable[[Scenario, int, float], None] | None = None
                    ) -> list[TimingRecord]:
    records = []
    for n in plan.n_values:
        for p in plan.p_values:
            cell = time_scenarios(plan.scenarios(n, p), on_sample=on_sample)
            records.extend(cell)
            if on_record is not None:
                for rec in cell:
                    on_record(rec)
    return records


def _index(records: Iterable[TimingRecord]):
    table: dict[tuple[int, float, ObservationMethod | None], TimingRecord] = {}
    for rec in records:
        s = rec.scenario
        table[(s.n_agents, round(s.rate, 12), s.method)] = rec
    return table


def surface_from_records(records: Iterable[TimingRecord], method: ObservationMethod | None,
                         name: str = "") -> SurfaceData:
    """Median elapsed time of ``method`` on the lattice spanned by the records."""
    records = [r for r in records if r.scenario.method is method]
    if not records:
        raise MissingMeasurementError(f"no measurements for {method}")
    table = _index(records)
    ns = sorted({k[0] for k in table})
    ps = sorted({k[1] for k in table})
    cells = np.empty((len(ps), len(ns)))
    for i, p in enumerate(ps):
        for j, n in enumerate(ns):
            rec = table.get((n, p, method))
            if rec is None:
                raise MissingMeasurementError(f"missing measurement N={n}, p={p}, method={method}")
            cells[i, j] = rec.median
    label = "none" if method is None else str(method)
    return SurfaceData(ns, ps, cells, name=name or label, provenance=host_provenance())


def fastest_method_map(records: Iterable[TimingRecord], tie_tolerance: float = 0.0,
                       provenance: dict | None = None) -> CalibrationMap:
    """Label every (N, p) node with the method of smallest median time.

    Medians within ``tie_tolerance`` (relative) of the best count as ties,
    which go to the exact methods, brute force first.
    """
    records = [r for r in records if r.scenario.method is not None]
    if not records:
        raise MissingMeasurementError("no measurements")
    table = _index(records)
    ns = sorted({k[0] for k in table})
    ps = sorted({k[1] for k in table})
    methods = sorted({k[2] for k in table}, key=TIE_PRIORITY.__getitem__)
    labels = []
    for p in ps:
        row = []
        for n in ns:
            medians = {}
            for m in methods:
                rec = table.get((n, p, m))
                if rec is None:
                    raise MissingMeasurementError(
                        f"missing measurement N={n}, p={p}, method={m}")
                medians[m] = rec.median
            best = min(medians.values())
            row.append(next(m for m in methods if medians[m] <= best * (1 + tie_tolerance)))
        labels.append(row)
    prov = host_provenance()
    prov.update(provenance or {})
    return CalibrationMap(ns, ps, labels, provenance=prov)


def host_provenance() -> dict:
    return {
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "host": platform.node(),
        "machine": platform.machine(),
        "processor": platform.processor() or platform.machine(),
        "cpu_count": os.cpu_count(),
        "python": platform.python_version(),
        "numpy": np.__version__,
    }


# -- timing record files ---------------------------------------------------

TIMING_COLUMNS = ("method", "agents", "rate", "grid_width", "grid_height", "steps", "seed",
                  "survey_d", "sample_size", "replicate", "elapsed_s")


class TimingCSVWriter:
    """One row per replicate, flushed as soon as it is measured."""

    def __init__(self, path):
        self._fh = open(path, "w", newline="")
        self._w = csv.writer(self._fh, lineterminator="\n")
        self._w.writerow(TIMING_COLUMNS)
        self._fh.flush()

    def add_sample(self, s: Scenario, replicate: int, elapsed: float) -> None:
        self._w.writerow((s.method_name, s.n_agents, repr(s.rate), s.sim.grid.width,
                          s.sim.grid.height, s.sim.steps, s.sim.seed,
                          "" if s.survey is None else repr(s.survey.d),
                          "" if s.survey is None else s.survey.n,
                          replicate, repr(elapsed)))
        self._fh.flush()

    def add_record(self, rec: TimingRecord) -> None:
        for r, e in enumerate(rec.elapsed):
            self.add_sample(rec.scenario, r, e)

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_timing_csv(path) -> list[TimingRecord]:
    """Rebuild TimingRecords (one per scenario) from a replicate-per-row file."""
    grouped: dict[tuple, TimingRecord] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            method = None if row["method"] == "none" else ObservationMethod.parse(row["method"])
            key = (row["method"], row["agents"], row["rate"], row["grid_width"],
                   row["grid_height"], row["steps"], row["seed"], row["survey_d"])
            if key not in grouped:
                grid = GridSpec(int(row["grid_width"]), int(row["grid_height"]))
                rate = float(row["rate"])
                zone = Zone.with_coverage(grid, rate)
                sim = SimConfig(grid=grid, zone=zone, agents=int(row["agents"]),
                                steps=int(row["steps"]), seed=int(row["seed"]))
                plan = None
                if row["survey_d"]:
                    plan = SurveyPlan(int(row["sample_size"]), float(row["survey_d"]),
                                      rate, int(row["agents"]))
                policy = _PlaceholderPolicy() if method is ObservationMethod.ADAPTIVE else None
                grouped[key] = TimingRecord(Scenario(sim, method, plan, 1, policy))
            grouped[key].elapsed.append(float(row["elapsed_s"]))
    for rec in grouped.values():
        object.__setattr__(rec.scenario, "replicates", len(rec.elapsed))
    return list(grouped.values())


class _PlaceholderPolicy:
    """Stands in for the policy of adaptive records read back from disk."""

    def needs_group(self, n_agents: int) -> bool:
        return True



def write_summary_line(**fields) -> str:
    """Single-line, machine-parseable ``key=value`` summary."""
    def fmt(v):
        if isinstance(v, float):
            return f"{v:.6g}"
        return str(v).replace(" ", "_")
    return " ".join(f"{k}={fmt(v)}" for k, v in fields.items())
