"""
The desk-scale benchmark
========================

Runs every measure on the three bundled datasets with both model families,
then clusters the datasets and summarises the rank correlations per
cluster. Equivalent to::

    exirt benchmark <bundled manifest> --out demo_output/benchmark
    exirt report demo_output/benchmark
"""

import json
import os

from exirt.benchmark import load_manifest, run_benchmark, run_report
from exirt.fixtures import manifest_path

out = os.path.join(os.environ.get("EXIRT_OUT", "demo_output"), "benchmark")

result = run_benchmark(load_manifest(manifest_path()), out)
for job in result.jobs:
    print(f"{job['dataset']:>20s} / {job['family']:<18s} test accuracy {job['test_accuracy']:.3f}")

summary = run_report(out)
print(json.dumps(summary["median_abs_rho_by_cluster"], indent=2))
print("clusters:", summary["clusters"])
