# %% [markdown]
# # What does it cost to watch a simulation?
#
# Agents random-walk on a 100x100 torus. Each step we want Z, the number of
# agents inside a band covering 20% of the grid. Here we time whole
# 1000-step runs with and without an observer, for growing populations.

# %%
import numpy as np

from mabsobs import ObservationMethod, Scenario, SimConfig, SurveyPlan, time_scenarios

N_VALUES = (2000, 6000, 10000, 14000, 20000)
METHODS = (None, ObservationMethod.BRUTE_FORCE, ObservationMethod.INDIRECT,
           ObservationMethod.SELF_OBSERVATION, ObservationMethod.SURVEY)

# %% [markdown]
# Replicates are interleaved across methods, so a slow patch on the machine
# hits every method alike. Each row below is the median of three runs.

# %%
table = {}
for n in N_VALUES:
    sim = SimConfig(agents=n, steps=1000, seed=n)
    scenarios = [Scenario(sim, m, SurveyPlan.design(n, 0.2, 0.08)
                          if m is ObservationMethod.SURVEY else None, replicates=3)
                 for m in METHODS]
    for rec in time_scenarios(scenarios):
        table[n, rec.scenario.method_name] = rec.median

names = ["none"] + [str(m) for m in METHODS[1:]]
print(f"{'N':>6} " + " ".join(f"{name:>17}" for name in names))
for n in N_VALUES:
    print(f"{n:>6} " + " ".join(f"{table[n, name] * 1e3:>14.1f} ms" for name in names))

# %% [markdown]
# Observation is extra work on top of moving agents, so every observed
# column should sit at or above "none". Indirect observation pays for the
# occupancy trace on every move, which usually makes it the slowest here.

# %%
overhead = {name: np.median([table[n, name] / table[n, "none"] for n in N_VALUES])
            for name in names[1:]}
for name, ratio in overhead.items():
    print(f"{name:>17}: {ratio:.2f}x the unobserved run")
