"""A small parameter sweep through the bench harness, written to CSV.

Same as ``ga-tamp bench --spec sweep.json`` with this bench spec in the file.

    GA_TAMP_THREADS=2 python demos/04_bench_sweep.py
"""

import csv
import sys

from ga_tamp.cli import normalize_bench_spec, run_bench, write_bench_csv

spec = normalize_bench_spec({
    "scene": "builtin:set1",
    "seeds": 3,
    "axes": {"basis": ["tetra", "octa", "icosa"], "selection_order": [1, 2]},
    "out": sys.argv[1] if len(sys.argv) > 1 else "bench_demo.csv",
})
rows = run_bench(spec)
write_bench_csv(spec["out"], rows)

with open(spec["out"]) as fh:
    for row in csv.DictReader(fh):
        print(f"{row['basis']:>6} order {row['selection_order']}: discovery {float(row['discovery_rate']):.0%}, "
              f"CD1 {float(row['CD1']):.2f} s, RRT1 {float(row['RRT1']):.2f} s, total {float(row['total']):.1f} s")
print("wrote", spec["out"])
