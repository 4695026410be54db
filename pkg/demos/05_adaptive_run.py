# %% [markdown]
# # Letting the map choose
#
# The adaptive observer looks up (N, p) in a calibration map and delegates
# to the labelled method. With E(Z) = N/5 we compare it with each method
# run on its own, across population sizes. Run demo 04 first, or a map
# will be calibrated here on a small grid.

# %%
from pathlib import Path

from mabsobs import (AdaptivePolicy, CalibrationMap, CalibrationPlan, ObservationMethod,
                     Scenario, SimConfig, SurveyPlan, fastest_method_map, run_calibration,
                     select_method, time_scenarios)

path = Path("demo-output/map.json")
if path.exists():
    cmap = CalibrationMap.load(path)
else:
    cmap = fastest_method_map(run_calibration(CalibrationPlan(
        n_values=(2000, 10000, 20000), p_values=(0.1, 0.2, 0.5), replicates=3)))
policy = AdaptivePolicy(cmap, p=0.2)

# %%
BF, SELF, SURVEY, ADAPTIVE = (ObservationMethod.BRUTE_FORCE, ObservationMethod.SELF_OBSERVATION,
                              ObservationMethod.SURVEY, ObservationMethod.ADAPTIVE)
print(f"{'N':>6} {'choice':>17} {'brute':>8} {'self':>8} {'survey':>8} {'adaptive':>9}")
for n in (2000, 6000, 10000, 14000, 20000):
    sim = SimConfig(agents=n, steps=1000, seed=n)
    plan = SurveyPlan.design(n, 0.2, 0.08)
    recs = time_scenarios([Scenario(sim, BF, replicates=5), Scenario(sim, SELF, replicates=5),
                           Scenario(sim, SURVEY, plan, replicates=5),
                           Scenario(sim, ADAPTIVE, plan, replicates=5, policy=policy)])
    ms = [r.median * 1e3 for r in recs]
    print(f"{n:>6} {str(select_method(cmap, n, 0.2)):>17} "
          + " ".join(f"{m:>8.1f}" for m in ms[:3]) + f" {ms[3]:>9.1f}")

# %% [markdown]
# The adaptive column should track the smallest of the three to its left.
# The group of self-observation is only maintained when the map can pick
# it for this population, so the adaptive run does not pay for rules it
# never reads.
