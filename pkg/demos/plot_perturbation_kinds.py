"""
How respondents are made
========================

Every respondent is the trained model facing a test set in which one or
two attributes were altered. Here each of the twelve alterations is applied
to a single column so their effect is visible side by side.
"""

import numpy as np

from exirt.perturbation import RespondentSpec, TrainStats, VariationKind, apply_variation, build_plan

rng = np.random.default_rng(1)
train = rng.normal(5.0, 2.0, size=(100, 2))
test = np.array([[3.0, 0.0], [5.5, 0.0], [9.0, 0.0], [4.0, 0.0]])

# statistics always come from the training rows
stats = TrainStats.from_matrix(train)
print("train mean/std/min/max of column 0:",
      np.round([stats.mean[0], stats.std[0], stats.min[0], stats.max[0]], 3))

for kind in VariationKind:
    out = apply_variation(test, RespondentSpec(1, (0,), kind, seed=7), stats)
    print(f"{kind.label:>18s}: {np.round(out[:, 0], 3)}")

# %%
# The plan enumerates the original model, every attribute under every kind,
# then every attribute pair under every kind.
plan = build_plan(4, ["negate", "binning"], max_arity=2)
print(f"\n{len(plan)} respondents for 4 attributes and 2 kinds")
for spec in plan.specs[:6]:
    print(spec)
