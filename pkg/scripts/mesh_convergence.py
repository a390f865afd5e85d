"""Ground-state level m(n) under uniform refinement, against the shooting bracket.

    python scripts/mesh_convergence.py --out results/
"""
import argparse
import sys
import time
from pathlib import Path

import numpy as np

from doublephase import io
from doublephase.mesh import build_interval_mesh
from doublephase.problem import DoublePhaseProblem, power_reaction, power_weight
from doublephase.solver import solve_ground_state

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
from oracles import cubic_energy_bracket  # noqa: E402


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results")
    ap.add_argument("--levels", type=int, nargs="+", default=[32, 64, 128, 256, 512, 1024])
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    rows = []
    for n in args.levels:
        pb = DoublePhaseProblem(2.0, 1.5, build_interval_mesh(1.0, n), power_weight(0.5, 1.0, 1e-3),
                                power_reaction(4, 2.0))
        t0 = time.perf_counter()
        rep = solve_ground_state(pb)
        wall = time.perf_counter() - t0
        rows.append((n, rep.energy, rep.residual_inf, rep.iterations, wall))
        print(f"n={n:5d}  m={rep.energy:.10f}  residual={rep.residual_inf:.2e}  its={rep.iterations:3d}  {wall:.2f}s")

    m = np.array([r[1] for r in rows])
    # energies converge as h^2, so one Richardson step per pair of levels
    rich = m[1:] - (m[:-1] - m[1:]) / 3
    lo, hi = cubic_energy_bracket(lambda x: 1e-3 * np.abs(x - 0.5))
    print(f"oracle bracket [{lo:.10f}, {hi:.10f}]")
    for n, r in zip(args.levels[1:], rich):
        print(f"Richardson({n}) = {r:.10f}")
    io.write_table_csv(out / "mesh_convergence.csv", ["n", "energy", "residual_inf", "iterations", "wall_s"], rows)


if __name__ == "__main__":
    main()
