"""Grid counts for a suite of synthetic systems, in the layout of a benchmark table.

For each system: the cost-certified grid at eps/J_max in {0.2, 0.3} (default
and strict W=0 policies), its a-priori bound, the largest W=0 gap at a grid
point, and the singular-value certified grid at the given grid counts M.

    python scripts/grid_count_table.py --n 41
"""

import argparse

from hankelpath import ToleranceSpec, run_path
from hankelpath.cli import synth_impulse_response
from hankelpath.errors import PathError
from hankelpath.hankel import frobenius_constant, hankel_map
from hankelpath.spectral import nuclear_norm

SYSTEMS = {
    "three-mode": [(1.0, 0.8), (0.5, -0.6), (0.3, 0.3)],
    "slow-pair": [(1.0, 0.95), (-0.8, 0.9)],
    "oscillatory": [(1.0, 0.7), (1.0, -0.7), (0.2, 0.1)],
    "five-mode": [(1.0, 0.9), (0.6, -0.8), (0.4, 0.5), (0.3, -0.3), (0.1, 0.05)],
}


def strict_count(g, eps):
    try:
        return str(run_path(g, ToleranceSpec("cost", eps, w_policy="zero")).m)
    except PathError as exc:
        return "stall" if "cannot advance" in str(exc) else ">10x"


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--n", type=int, default=41)
    ap.add_argument("--grid-counts", type=int, nargs="+", default=[30, 60])
    args = ap.parse_args()

    head = f"{'system':<12} {'eps/J':>5} {'m':>4} {'m W=0':>6} {'bound':>6} {'eps_min/J':>9}"
    head += "".join(f" {'m(M=' + str(M) + ')':>9}" for M in args.grid_counts)
    print(head)
    for name, modes in SYSTEMS.items():
        g = synth_impulse_response(modes, args.n)
        jmax = nuclear_norm(hankel_map(g))
        C_A = frobenius_constant(args.n)
        sv_counts = [run_path(g, ToleranceSpec("sv", C_A * float(g @ g) / M)).m for M in args.grid_counts]
        for frac in (0.2, 0.3):
            res = run_path(g, ToleranceSpec("cost", frac * jmax))
            eps_min = max(res.gap_at_star) / jmax
            line = f"{name:<12} {frac:>5.1f} {res.m:>4d} {strict_count(g, frac * jmax):>6} "
            line += f"{res.m_bound:>6d} {eps_min:>9.3f}"
            line += "".join(f" {m:>9d}" for m in sv_counts)
            print(line)


if __name__ == "__main__":
    main()
