# %% [markdown]
# # A map of the fastest method
#
# Calibrate brute force, self-observation and survey on an (N, p) grid,
# then label every node with the method whose median run was shortest.
# The map is saved as JSON for the adaptive observer (next demo).

# %%
import sys
from pathlib import Path

from mabsobs import CalibrationPlan, fastest_method_map, run_calibration

full = "--full" in sys.argv
plan = CalibrationPlan() if full else CalibrationPlan(
    n_values=(2000, 6000, 10000, 14000, 20000), p_values=(0.05, 0.2, 0.5, 0.9),
    replicates=3)
records = run_calibration(plan)
cmap = fastest_method_map(records, provenance={"plan": plan.to_dict()})

# %%
letters = {"brute-force": "B", "self-observation": "S", "survey": "V"}
print("      N: " + " ".join(f"{int(n):>6}" for n in cmap.n_axis))
for p, row in zip(cmap.p_axis, cmap.labels):
    print(f"p={p:<5.2f}  " + " ".join(f"{letters[str(m)]:>6}" for m in row))
print("B brute force, S self-observation, V survey;",
      {str(m): k for m, k in cmap.counts().items()})

# %% [markdown]
# Survey probes about a hundred agents instead of all of them, so it takes
# over once N is large. Where it does not, brute force usually holds the
# cell. Where exactly the boundary falls depends on the machine, so the map
# is meant to be rebuilt locally rather than shipped.

# %%
out = Path("demo-output")
out.mkdir(exist_ok=True)
cmap.save(out / "map.json")
cmap.save(out / "map.csv")
print("saved", out / "map.json")
