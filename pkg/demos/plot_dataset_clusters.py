"""
Grouping datasets by their properties
=====================================

Fifteen meta-properties describe each dataset. K-means on the
standardised properties, with K chosen by mean silhouette, groups similar
datasets; MCA of the high/low coded table shows which properties drive
the groups.
"""

import os

import numpy as np

from exirt.analytics import mca, silhouette_scan, write_mca
from exirt.dataset import PropertyVector, binarize_properties, load_csv, meta_features
from exirt.fixtures import NAMES, fixture_path

out = os.environ.get("EXIRT_OUT", "demo_output")

rows = [(n, meta_features(load_csv(fixture_path(n), "class"))) for n in NAMES]
for name, pv in rows:
    print(f"{name:>20s}: entropy {pv.class_entropy:.3f}, majority {pv.majority_class_percentage:.1f}%, "
          f"numeric {pv.number_of_numeric_features}, symbolic {pv.number_of_symbolic_features}, "
          f"binary {pv.number_of_binary_features}")

# %%
# Three datasets are too few for a silhouette scan beyond K=2, so we add
# jittered copies to mimic a larger collection.
rng = np.random.default_rng(0)
names, X = [], []
for name, pv in rows:
    base = pv.as_array()
    for i in range(6):
        names.append(f"{name}~{i}")
        X.append(base * rng.normal(1.0, 0.05, size=base.shape))
scan = silhouette_scan(np.array(X), names, range(2, 8), seed=0)
print("\nmean silhouette per K:", {k: round(v, 3) for k, v in scan.scores.items()})
print("chosen K:", scan.chosen_k)

# %%
# High/low coding against the column mean, then MCA.
table = binarize_properties([(n, x) for n, x in zip(names, X)], PropertyVector.names())
res = mca(table)
print("explained inertia of the first components:", np.round(res.explained_inertia[:3], 3))
write_mca(os.path.join(out, "clusters"), res, scan.assignment.as_dict())
