"""Smallest step count M* reaching 90% success on the Grover family, and log-log slopes.

Usage: python3 scripts/scaling_sweep.py [--max-qubits 6] [--trials 500] [--out scaling.csv]
"""
from __future__ import annotations

import argparse
import csv

from fpqs_adiabatic.cli import fit_power_law
from fpqs_adiabatic.evolution import minimal_steps
from fpqs_adiabatic.interpolation import make_grover_instance


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-qubits", type=int, default=6)
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--threshold", type=float, default=0.9)
    ap.add_argument("--levels", type=int, nargs="+", default=[0, 1])
    ap.add_argument("--out", default="scaling.csv")
    args = ap.parse_args()

    rows = []
    for nq in range(1, args.max_qubits + 1):
        p = make_grover_instance(nq, seed=nq)
        row = {"N": p.dim, "ratio": p.ratio}
        for level in args.levels:
            row[f"M_star_n{level}"] = minimal_steps(p, level, args.trials, args.threshold, seed_base=nq * 10**6)
        print(row, flush=True)
        rows.append(row)
    with open(args.out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    for level in args.levels:
        fit = fit_power_law([r["ratio"] for r in rows], [r[f"M_star_n{level}"] for r in rows], f"n={level}")
        print(f"level {level}: slope {fit.slope:.3f}, r2 {fit.r2:.3f}")


if __name__ == "__main__":
    main()
