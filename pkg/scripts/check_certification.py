"""Oracle-backed certification check on random small instances.

For each instance, both certified paths are compared with brute-force
solutions on a dense lambda grid, and the worst error relative to eps is
printed.  Thread count follows HANKELPATH_THREADS.

    python scripts/check_certification.py --instances 5 --n 5 --points 200
"""

import argparse
import time

import numpy as np

from hankelpath import ToleranceSpec, run_path
from hankelpath.hankel import frobenius_constant, hankel_map
from hankelpath.oracle import dense_path
from hankelpath.spectral import nuclear_norm, sv_distance_sq


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--instances", type=int, default=5)
    ap.add_argument("--n", type=int, default=5)
    ap.add_argument("--points", type=int, default=200)
    ap.add_argument("--eps-frac", type=float, default=0.2)
    ap.add_argument("--grid-count", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    C_A = frobenius_constant(args.n)
    for i in range(args.instances):
        t0 = time.perf_counter()
        g = np.random.default_rng(args.seed + i).standard_normal(args.n)
        eps_c = args.eps_frac * nuclear_norm(hankel_map(g))
        eps_s = C_A * float(g @ g) / args.grid_count
        cost = run_path(g, ToleranceSpec("cost", eps_c))
        sv = run_path(g, ToleranceSpec("sv", eps_s))
        sweep = dense_path(g, args.points, restarts=3, subgrad_iters=60, seed=i)
        e_c = max(cost.objective_at(lam) - obj for lam, _, _, obj in sweep)
        e_s = max(sv_distance_sq(hankel_map(sv.solution_at(lam)), hankel_map(x)) for lam, x, _, _ in sweep)
        print(f"instance {i}: cost m={cost.m} err/eps={e_c / eps_c:.3f} | "
              f"sv m={sv.m} err/eps={e_s / eps_s:.3f} | {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
