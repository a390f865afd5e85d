"""Decay of theta(t u1) - lambda1 along the eigenfunction ray for several (p, q).

    python scripts/quotient_gap_scaling.py
"""
import argparse
from pathlib import Path

import numpy as np

from doublephase import io
from doublephase.eigen import first_eigenpair, lemma1_diagnostic
from doublephase.mesh import build_interval_mesh
from doublephase.problem import DoublePhaseProblem, power_reaction, power_weight


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results")
    ap.add_argument("--n", type=int, default=512)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    mesh = build_interval_mesh(1.0, args.n)
    grid = np.geomspace(10, 1e4, 13)
    summary = []
    for p, q in ((3.0, 2.0), (3.0, 1.5), (4.0, 2.5), (2.0, 1.5)):
        eig = first_eigenpair(mesh, p)
        pb = DoublePhaseProblem(p, q, mesh, power_weight(0.5, 1.0), power_reaction(p + 1, p))
        tab = lemma1_diagnostic(pb, grid, eig=eig)
        summary.append((p, q, eig.lambda1, tab.slope, -(p - q)))
        io.write_table_csv(out / f"quotient_gap_p{p:g}_q{q:g}.csv", ["t", "theta", "gap"], tab.rows)
        print(f"p={p:g} q={q:g}  lambda1={eig.lambda1:.8f}  slope={tab.slope:.6f}  expected={-(p - q):g}")
    io.write_table_csv(out / "quotient_gap_summary.csv", ["p", "q", "lambda1", "slope", "expected"], summary)


if __name__ == "__main__":
    main()
