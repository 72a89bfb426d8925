"""Run every registered inequality case and print a one-line summary each.

A case passes when its grid minimum reaches 98% of the threshold.
"""
import os
import sys

from artifact.verifier import run_suite

resolution = int(sys.argv[1]) if len(sys.argv) > 1 else 200
ok = True
for rep in run_suite(None, resolution, os.cpu_count() or 1):
    ok &= rep.passed
    where = ", ".join(f"{k}={v:.4g}" for k, v in rep.argmin.items())
    print(f"{rep.id:10s} {'pass' if rep.passed else 'FAIL'}  min {rep.min:10.5f}  threshold {rep.threshold:<8g} at {where}")
sys.exit(0 if ok else 1)
