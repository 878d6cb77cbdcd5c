"""Regenerate the golden r = 1, T = 30 pulse data in tests/data from the linear oracle.

    python scripts/make_golden.py [--check]

The trajectory is computed with the variation-of-constants oracle at
m = 960 (h = 1/32) and stored every 16th node (h = 0.5). Peak times and
heights come from the full-resolution oracle trajectory.
"""
import argparse
import json
import sys
from pathlib import Path

from laglens.dde import (DdeProblem, GaussianHistory, LinearDecayFeedback, SolverConfig,
                         Trajectory, fmt, linear_oracle_integrate, max_abs_diff,
                         write_trajectory_csv)
from laglens.mapper import extract_peaks

DATA = Path(__file__).resolve().parents[1] / "tests" / "data"
M = 960
STRIDE = 16


def pulse_problem():
    return DdeProblem(LinearDecayFeedback(1.0), 30.0, GaussianHistory(20.0, -25.0, 1.0), 1200.0)


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--check", action="store_true", help="also report oracle self-consistency")
    args = ap.parse_args(argv)
    problem = pulse_problem()
    ref = linear_oracle_integrate(problem, SolverConfig(M))
    if args.check:
        finer = linear_oracle_integrate(problem, SolverConfig(2 * M))
        print("oracle m=960 vs m=1920:", max_abs_diff(ref, finer), file=sys.stderr)
    coarse = Trajectory(ref.t0, ref.h * STRIDE, ref.y[::STRIDE], ref.dy[::STRIDE])
    DATA.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(coarse, DATA / "pulse_oracle_trajectory.csv")
    peaks = extract_peaks(ref, guard=50.0, threshold=1e-6)
    (DATA / "pulse_oracle_peaks.json").write_text(json.dumps({
        "problem": problem.summary(),
        "steps_per_delay": M,
        "guard": 50.0,
        "threshold": 1e-6,
        "t_peak": [fmt(v) for v in peaks.t],
        "y_peak": [fmt(v) for v in peaks.y],
    }, indent=1) + "\n")


if __name__ == "__main__":
    main()
