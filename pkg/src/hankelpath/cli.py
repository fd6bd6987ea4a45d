"""Command-line interface.

Subcommands::

    hankelpath synth  --mode AMP POLE [--mode ...] --n N --output g.csv
    hankelpath solve  --input g.csv --lambda LAM --out DIR
    hankelpath path   --input g.csv --algorithm {cost,sv} (--eps|--eps-frac|--grid-count) --out DIR
    hankelpath verify --input g.csv --algorithm {cost,sv} ... --points 200 --out DIR

Exit codes: 0 success, 1 solver failure, 2 input error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from hankelpath.admm import AdmmConfig, HankelAdmm
from hankelpath.errors import HankelPathError, NumericalError, PathError, ValidationError
from hankelpath.hankel import (
    cn_constant,
    frobenius_constant,
    hankel_map,
    order,
)
from hankelpath.path import ToleranceSpec, max_evals_cost, max_evals_sv, run_path
from hankelpath.spectral import singular_values, sv_distance_sq

log = logging.getLogger("hankelpath")

SCHEMA = 1
EXIT_OK, EXIT_SOLVER, EXIT_INPUT = 0, 1, 2


class InputError(HankelPathError):
    pass


def _fmt(x: float) -> str:
    return "%.17g" % x


# ---------------------------------------------------------------- file I/O


def read_impulse_response(path, truncate: bool = False) -> np.ndarray:
    """Parse a single-column CSV (optional header, ``#`` comments allowed)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    values = []
    rows = [r for r in csv.reader(text.splitlines()) if r and not r[0].lstrip().startswith("#")]
    for lineno, row in enumerate(rows, start=1):
        cells = [c.strip() for c in row if c.strip() != ""]
        if not cells:
            continue
        if len(cells) != 1:
            raise InputError(f"{path}: row {lineno} has {len(cells)} columns, expected 1")
        try:
            values.append(float(cells[0]))
        except ValueError:
            if lineno == 1 and not values:
                continue  # header
            raise InputError(f"{path}: row {lineno}: cannot parse {cells[0]!r} as a number") from None
    if not values:
        raise InputError(f"{path}: no samples found")
    if truncate and len(values) % 2 == 0:
        values = values[:-1]
    if len(values) % 2 == 0:
        raise InputError(
            f"{path}: {len(values)} samples; an odd count n = 2p - 1 is required "
            "(use --truncate to drop the last sample)"
        )
    if not all(math.isfinite(v) for v in values):
        raise InputError(f"{path}: non-finite sample")
    return np.array(values)


def write_column(path, values, header: str = "g") -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([header])
        for v in values:
            w.writerow([_fmt(v)])


def _write_table(path, comments, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, float) else v for v in row])


def _write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------- commands


def synth_impulse_response(modes, n: int) -> np.ndarray:
    """``g_k = sum_j c_j a_j^(k-1)`` for ``k = 1..n``; poles must satisfy ``|a| < 1``."""
    if n < 1 or n % 2 == 0:
        raise ValidationError(f"n must be a positive odd integer, got {n}")
    if not modes:
        raise ValidationError("at least one (amplitude, pole) mode is required")
    k = np.arange(n)
    g = np.zeros(n)
    for amp, pole in modes:
        if not abs(pole) < 1:
            raise ValidationError(f"unstable pole {pole}: |pole| must be < 1")
        g += amp * pole ** k
    return g


def _admm_config(args) -> AdmmConfig:
    return AdmmConfig(
        rho=args.rho,
        adaptive_rho=args.adaptive_rho,
        eps_abs=args.eps_abs,
        eps_rel=args.eps_rel,
        max_iters=args.max_iters,
    )


def cmd_synth(args) -> int:
    g = synth_impulse_response([tuple(m) for m in args.mode], args.n)
    write_column(args.output, g)
    print(f"wrote {args.n} samples to {args.output}")
    return EXIT_OK


def cmd_solve(args) -> int:
    g_o = read_impulse_response(args.input, args.truncate)
    report = HankelAdmm(g_o, _admm_config(args)).solve(args.lam)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sigma = singular_values(hankel_map(report.g_opt))
    _write_json(out / "solution.json", {
        "schema": SCHEMA,
        "lambda": args.lam,
        "g_opt": report.g_opt.tolist(),
        "objective": report.objective,
        "sigma": sigma.tolist(),
        "residuals": {
            "primal": report.primal_residual,
            "dual": report.dual_residual,
            "eps_primal": report.eps_primal,
            "eps_dual": report.eps_dual,
        },
        "iterations": report.iterations,
        "converged": report.converged,
    })
    _write_table(
        out / "sigma.csv",
        [f"singular values of H(g_opt) at lambda={_fmt(args.lam)}, nonincreasing"],
        ["index", "sigma"],
        [(i + 1, float(s)) for i, s in enumerate(sigma)],
    )
    print(f"objective={report.objective:.10g} iterations={report.iterations} "
          f"converged={report.converged}")
    if not report.converged:
        print("error: ADMM did not converge (raise --max-iters or loosen tolerances)",
              file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def resolve_eps(args, g_o) -> float:
    """Absolute tolerance from ``--eps``, ``--eps-frac`` (of J_max) or ``--grid-count``.

    ``--grid-count M`` means ``eps = C_A ||g_o||^2 / M`` for either algorithm.
    """
    if args.eps is not None:
        eps = args.eps
    elif args.eps_frac is not None:
        eps = args.eps_frac * float(singular_values(hankel_map(g_o)).sum())
    else:
        eps = frobenius_constant(g_o.shape[0], args.ca_mode) * float(g_o @ g_o) / args.grid_count
    if not eps > 0:
        raise InputError(f"tolerance must be positive, got eps={eps}")
    return eps


def _tolerance_spec(args, eps) -> ToleranceSpec:
    return ToleranceSpec(
        algorithm=args.algorithm,
        eps=eps,
        c_a_mode=args.ca_mode,
        use_fw=args.fw,
        fw_iters=args.fw_iters,
        w_policy=args.w_policy,
        use_first_bound=not args.no_first_bound,
    )


def _manifest(args, eps) -> dict:
    return {
        "input": str(args.input),
        "algorithm": args.algorithm,
        "eps": eps,
        "eps_frac": args.eps_frac,
        "grid_count": args.grid_count,
        "ca_mode": args.ca_mode,
        "fw": args.fw,
        "fw_iters": args.fw_iters,
        "w_policy": args.w_policy,
        "use_first_bound": not args.no_first_bound,
        "admm": {
            "rho": args.rho, "adaptive_rho": args.adaptive_rho,
            "eps_abs": args.eps_abs, "eps_rel": args.eps_rel,
            "max_iters": args.max_iters,
        },
        "out": str(args.out),
        "seed": getattr(args, "seed", None),
    }


def path_report(res, manifest) -> dict:
    g_o = res.g_o
    j_max = res.j_max
    eps = res.spec.eps
    report = {
        "schema": SCHEMA,
        "algorithm": res.spec.algorithm,
        "complete": res.complete,
        "n": int(g_o.shape[0]),
        "p": order(g_o.shape[0]),
        "lambda_max": res.lam_max,
        "J_max": j_max,
        "eps": eps,
        "eps_over_J_max": eps / j_max if j_max > 0 else None,
        "C_A": res.C_A,
        "c_n": cn_constant(order(g_o.shape[0])),
        "m": res.m,
        "m_bound": res.m_bound,
        "grid": list(map(float, res.grid)),
        "w_modes": list(res.w_modes),
        "admm_iterations": [r.iterations for r in res.admm_reports],
        "max_gap_at_grid_points_w0": max(res.gap_at_star) if res.gap_at_star else 0.0,
        "manifest": manifest,
    }
    if res.spec.algorithm == "cost" and g_o.any():
        report["m_bound_general_w"] = max_evals_cost(g_o, eps, "general")
    elif g_o.any():
        report["m_bound_sv"] = max_evals_sv(g_o, eps, res.C_A)
    return report


def write_path_outputs(res, out: Path, manifest) -> None:
    out.mkdir(parents=True, exist_ok=True)
    bound_name = "gap_d" if res.spec.algorithm == "cost" else "sv_bound_s"
    _write_table(
        out / "grid.csv",
        [
            "one row per grid point; x(lambda_star) is used on [lambda_star, lambda_next)",
            "lambda_star, lambda_next: regularization parameter (units of ||g||_2)",
            "objective: nuclear norm of H(x(lambda_star))",
            f"{bound_name}: certified error bound at lambda_next "
            + ("(cost units)" if res.spec.algorithm == "cost" else "(squared singular values)"),
            "gap_at_star_w0: d(lambda_star, W=0); w_mode: subgradient used to place lambda_next",
        ],
        ["lambda_star", "lambda_next", "objective", bound_name, "gap_at_star_w0",
         "w_mode", "admm_iterations"],
        [
            (float(lam), float(nxt), float(obj), float(b), float(g0), mode, rep.iterations)
            for lam, nxt, obj, b, g0, mode, rep in zip(
                res.grid, res.right, res.objectives, res.bound_trace,
                res.gap_at_star, res.w_modes, res.admm_reports,
            )
        ],
    )
    p = order(res.g_o.shape[0])
    _write_table(
        out / "sigma.csv",
        ["singular values of H(x(lambda_star)) per grid point, nonincreasing (Hankel singular values)"],
        ["lambda_star"] + [f"sigma_{i + 1}" for i in range(p)],
        [[float(lam)] + [float(s) for s in sig] for lam, sig in zip(res.grid, res.sigma)],
    )
    _write_json(out / "report.json", path_report(res, manifest))


def cmd_path(args) -> int:
    g_o = read_impulse_response(args.input, args.truncate)
    eps = resolve_eps(args, g_o)
    spec = _tolerance_spec(args, eps)
    manifest = _manifest(args, eps)
    out = Path(args.out)
    try:
        res = run_path(g_o, spec, _admm_config(args))
    except PathError as exc:
        if exc.partial is not None:
            write_path_outputs(exc.partial, out, manifest)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    write_path_outputs(res, out, manifest)
    print(f"m={res.m} m_bound={res.m_bound} eps={eps:.6g} J_max={res.j_max:.6g}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from hankelpath.oracle import dense_path

    g_o = read_impulse_response(args.input, args.truncate)
    if g_o.shape[0] > 9:
        raise InputError(f"verify uses the brute-force oracle and needs n <= 9, got {g_o.shape[0]}")
    eps = resolve_eps(args, g_o)
    spec = _tolerance_spec(args, eps)
    out = Path(args.out)
    try:
        res = run_path(g_o, spec, _admm_config(args))
    except PathError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    sweep = dense_path(g_o, args.points, workers=args.workers, seed=args.seed)
    rows, worst = [], -math.inf
    for lam, g, sigma, obj in sweep:
        if spec.algorithm == "cost":
            err = res.objective_at(lam) - obj
        else:
            err = sv_distance_sq(hankel_map(res.solution_at(lam)), hankel_map(g))
        worst = max(worst, err)
        rows.append((lam, obj, err))
    write_path_outputs(res, out, _manifest(args, eps))
    _write_table(
        out / "verify.csv",
        ["oracle sweep: true error of the approximate path at each lambda",
         "error: cost difference (cost) or squared singular-value distance (sv)"],
        ["lambda", "oracle_objective", "error"],
        rows,
    )
    ok = worst <= eps + 2e-3
    _write_json(out / "verify.json", {
        "schema": SCHEMA, "eps": eps, "max_error": worst, "points": args.points,
        "certified": ok, "m": res.m, "m_bound": res.m_bound,
    })
    print(f"max error {worst:.6g} vs eps {eps:.6g}: {'OK' if ok else 'VIOLATED'}")
    return EXIT_OK if ok else EXIT_SOLVER


# ---------------------------------------------------------------- parser


def _add_admm_flags(p):
    d = AdmmConfig()
    g = p.add_argument_group("ADMM")
    g.add_argument("--rho", type=float, default=d.rho)
    g.add_argument("--adaptive-rho", action="store_true")
    g.add_argument("--eps-abs", type=float, default=d.eps_abs)
    g.add_argument("--eps-rel", type=float, default=d.eps_rel)
    g.add_argument("--max-iters", type=int, default=d.max_iters)


def _add_path_flags(p):
    p.add_argument("--input", required=True)
    p.add_argument("--truncate", action="store_true", help="drop the last sample if n is even")
    p.add_argument("--algorithm", choices=("cost", "sv"), default="cost")
    tol = p.add_mutually_exclusive_group(required=True)
    tol.add_argument("--eps", type=float)
    tol.add_argument("--eps-frac", type=float, help="eps as a fraction of J_max = ||H(g_o)||_*")
    tol.add_argument("--grid-count", type=int, help="eps from the a-priori grid-count bound M")
    p.add_argument("--ca-mode", choices=("loose", "tight"), default="loose")
    p.add_argument("--fw", action="store_true", help="refine W by Frank-Wolfe")
    p.add_argument("--fw-iters", type=int, default=200)
    p.add_argument("--w-policy", choices=("zero", "best"), default="best")
    p.add_argument("--no-first-bound", action="store_true",
                   help="sv algorithm: ignore the fixed-nuclear-norm term")
    p.add_argument("--out", required=True)
    _add_admm_flags(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hankelpath", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic impulse response")
    p.add_argument("--mode", nargs=2, type=float, action="append", required=True,
                   metavar=("AMP", "POLE"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("solve", help="solve at a single lambda")
    p.add_argument("--input", required=True)
    p.add_argument("--truncate", action="store_true")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--out", default=".")
    _add_admm_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("path", help="certified approximate regularization path")
    _add_path_flags(p)
    p.set_defaults(func=cmd_path)

    p = sub.add_parser("verify", help="path plus brute-force oracle sweep (n <= 9)")
    _add_path_flags(p)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None,
                   help="oracle threads (default: $HANKELPATH_THREADS or core count)")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "grid_count", None) is not None and args.grid_count < 1:
        parser.error("--grid-count must be >= 1")
    try:
        return args.func(args)
    except (InputError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, HankelPathError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
