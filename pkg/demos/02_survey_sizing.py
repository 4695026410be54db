# %% [markdown]
# # How big a sample does a survey need?
#
# A survey probes n agents drawn without replacement and scales the hit
# count up to the population. The sample size comes from the accepted
# error d on the rate and the expected rate p.

# %%
import numpy as np

from mabsobs import (GridSpec, SimConfig, SurveyPlan, Zone, ground_truth_count,
                     init_simulation, sample_size, streams)
from mabsobs.observers import SurveyObserver

# %% [markdown]
# Sample sizes for the two error targets. With d = 0.08 a population of
# 10000 needs only 100 probes at p = 0.2; tightening to d = 0.008 pushes
# the survey close to a census.

# %%
for d in (0.08, 0.008):
    print(f"d = {d}")
    for n in (2000, 10000, 20000):
        sizes = [sample_size(n, p, d) for p in (0.05, 0.2, 0.5, 0.9)]
        print(f"  N={n:>6}: " + "  ".join(f"p={p}: {s:>5}" for p, s in
                                         zip((0.05, 0.2, 0.5, 0.9), sizes)))

# %% [markdown]
# Does the estimate land within d of the truth as often as the sizing
# promises? Freeze one layout and draw many samples.

# %%
grid = GridSpec(100, 100)
state = init_simulation(SimConfig(grid=grid, zone=Zone.with_coverage(grid, 0.2),
                                  agents=10_000, seed=1, trace=False, membership=False))
truth = ground_truth_count(state, state.zone)
_, obs_rng = streams(1)
for d in (0.08, 0.008):
    plan = SurveyPlan.design(10_000, 0.2, d)
    observer = SurveyObserver(state, plan, obs_rng)
    est = np.array([observer.value(state) for _ in range(2000)])
    inside = np.mean(np.abs(est - truth) / 10_000 <= d)
    print(f"d={d}: n={plan.n}, Z={truth}, mean estimate {est.mean():.1f}, "
          f"within d in {inside:.1%} of draws")
