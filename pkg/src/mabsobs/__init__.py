"""Observing a counting property of an agent-based simulation, and what it costs.

The case study is a random walk of N agents on a torus with one observed
zone. The quantity of interest is Z, the number of agents inside the zone,
obtained each step by brute force, by reading an environment trace, by
agent self-observation, or by a sample survey. :mod:`mabsobs.bench` times
these methods over a grid of population sizes and rates and derives a
fastest-method map, which :mod:`mabsobs.adaptive` uses at run time.
"""

from .adaptive import AdaptiveObserver, AdaptivePolicy, adaptive_observe, select_method
from .bench import (CalibrationPlan, MissingMeasurementError, Scenario, TimingRecord,
                    fastest_method_map, run_calibration, run_once, surface_from_records,
                    time_run, time_scenarios)
from .maps import CalibrationMap
from .observers import (CASE_STUDY_RULES, BruteForceObserver, IndirectObserver,
                        MembershipRules, Observation, ObservationMethod, SelfObserver,
                        SurveyObserver, apply_membership_rules, group_filter, make_observer,
                        observe_brute_force, observe_indirect, observe_self, observe_survey,
                        zone_filter)
from .sampling import Sampler, SurveyPlan, estimate_total, sample_size, srswor, variance_proxy
from .sim import (AgentState, ConfigurationError, GridSpec, Group, SimConfig, SimState, Zone,
                  ground_truth_count, init_simulation, move, step, streams)
from .surfaces import (AxisMismatchError, SurfaceData, bilinear, diff_surface,
                       response_surface, zero_isoline)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
