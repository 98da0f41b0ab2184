"""Command line entry point: ``maxplus-riccati {solve,recipe,bench,verify}``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from .config import Config, load_config
from .errors import ConfigError, FiniteEscape, RiccatiError
from .io import read_matrix, read_trajectory, write_kernel, write_matrix, write_trajectory
from .linalg import as_sym
from .problem import admissible_family, load_problem
from .recipe import Recipe, StepError
from .riccati import integrate_direct, integrate_seed
from .verify import CHECKS, run_checks

log = logging.getLogger("maxplus_riccati")


def _mtilde_batch(spec, cfg: Config, seed: int) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    batch = [admissible_family(spec, eps) for eps in cfg.recipe_mtilde_eps]
    batch += [admissible_family(spec, 0.2, rng) for _ in range(cfg.recipe_mtilde_random)]
    for path in cfg.recipe_mtilde_files:
        try:
            batch.append(as_sym(read_matrix(Path(path)), atol=1e-8))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"recipe.mtilde_files: {exc}") from None
    if not batch:
        raise ConfigError("recipe: no M_tilde values configured")
    return batch


def cmd_solve(cfg: Config, args) -> int:
    spec = load_problem(cfg)
    t_end = cfg.riccati_t_end if args.t is None else args.t
    out = args.out
    if t_end < 0:
        raise ConfigError("--t: must be non-negative")
    if cfg.solve_mode == "direct":
        Mt = admissible_family(spec, cfg.solve_mtilde_eps)
        P = integrate_direct(spec, Mt, t_end, rtol=cfg.riccati_rtol, atol=cfg.riccati_atol,
                             ceiling=cfg.riccati_ceiling)
        write_matrix(out / "P_final.csv", P)
        return 0
    if t_end == 0:
        write_matrix(out / "P_final.csv", spec.M)
        return 0
    try:
        traj = integrate_seed(spec, t_end, rtol=cfg.riccati_rtol, atol=cfg.riccati_atol,
                              ceiling=cfg.riccati_ceiling)
    except FiniteEscape as exc:
        rep = exc.report
        print(f"FiniteEscape: |P|_F exceeded {cfg.riccati_ceiling:g}; t_escape_lower={rep.t_escape_lower:.9g}",
              file=sys.stderr)
        for t, nrm in rep.norm_history[-5:]:
            print(f"  t={t:.9g} |P|_F={nrm:.6e}", file=sys.stderr)
        if exc.trajectory is not None:
            write_trajectory(out / "trajectory.csv", exc.trajectory.rows())
        return exc.exit_code
    write_trajectory(out / "trajectory.csv", traj.rows())
    write_matrix(out / "P_final.csv", traj.P[-1])
    write_matrix(out / "Q_final.csv", traj.Q[-1])
    write_matrix(out / "R_final.csv", traj.R[-1])
    log.info("seed integrated to t=%.6g in %d steps", traj.tau_star, traj.n_steps)
    return 0


def cmd_recipe(cfg: Config, args) -> int:
    spec = load_problem(cfg)
    batch = _mtilde_batch(spec, cfg, args.seed)
    if cfg.recipe_t == 0:
        for i, Mt in enumerate(batch):
            write_matrix(args.out / f"P_tilde_{i}.csv", Mt)
        return 0
    recipe = Recipe(spec, cfg.recipe_t, cfg.recipe_kappa, cfg.recipe_mode, rtol=cfg.riccati_rtol,
                    atol=cfg.riccati_atol, rel_tol=cfg.pinv_rel_tol)
    solutions = recipe.solve_batch(batch, threads=args.threads)
    for i, P in enumerate(solutions):
        write_matrix(args.out / f"P_tilde_{i}.csv", P)
    write_kernel(args.out / "kernel.csv", recipe.kernel)
    report = recipe.report(solutions)
    (args.out / "recipe_report.txt").write_text("\n".join(report) + "\n", encoding="utf-8")
    for line in report:
        print(line)
    return 0


def cmd_bench(cfg: Config, args) -> int:
    spec = load_problem(cfg if cfg.problem_name == "custom" else replace(cfg, grid_n=cfg.bench_n))
    Mt = admissible_family(spec, cfg.bench_mtilde_eps)
    records = bench_mod.run_bench(spec, cfg.bench_t, Mt, kappas=cfg.bench_kappas,
                                  direct_rtols=cfg.bench_direct_rtols,
                                  reference_rtol=cfg.bench_reference_rtol,
                                  recipe_rtol=cfg.riccati_rtol, recipe_atol=cfg.riccati_atol,
                                  rel_tol=cfg.pinv_rel_tol)
    bench_mod.write_bench(args.out / "bench.csv", records)
    summary = bench_mod.summarize(records)
    (args.out / "bench_summary.txt").write_text("\n".join(summary) + "\n", encoding="utf-8")
    for line in summary:
        print(line)
    return 0


def cmd_verify(cfg: Config, args) -> int:
    spec = load_problem(cfg)
    rows = []
    if args.trajectory is not None:
        try:
            dump = read_trajectory(args.trajectory)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"--trajectory: {exc}") from None
        margin = min((r["margin_P_minus_M"] for r in dump if r["t"] > 0), default=float("nan"))
        rows.append(("trajectory-margins", margin, 0.0, margin > 0))
    only = args.only.split(",") if args.only else None
    if only is not None and set(only) - set(CHECKS):
        raise ConfigError(f"--only: unknown check(s) {sorted(set(only) - set(CHECKS))}; choose from {CHECKS}")
    rows += run_checks(spec, cfg, seed=args.seed, only=only)
    with open(args.out / "verify.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["check_name", "metric", "tolerance", "status"])
        for name, metric, tol, ok in rows:
            w.writerow([name, f"{metric:.6e}", f"{tol:.1e}", "pass" if ok else "fail"])
    for name, metric, tol, ok in rows:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<20} {metric:.3e}  (tol {tol:.1e})")
    return 0 if all(ok for *_, ok in rows) else 1


COMMANDS = {"solve": cmd_solve, "recipe": cmd_recipe, "bench": cmd_bench, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="key=value configuration file")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="maxplus-riccati", description=__doc__, parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("solve", parents=[common], help="integrate the seed (or a direct) solution")
    p.add_argument("--t", type=float, default=None, help="final time (overrides riccati.t_end)")
    sub.add_parser("recipe", parents=[common], help="propagate a batch of initial data via the dual-space recipe")
    sub.add_parser("bench", parents=[common], help="error-versus-time study, writes bench.csv")
    p = sub.add_parser("verify", parents=[common], help="run control-theoretic and algebraic checks")
    p.add_argument("--only", default=None, help=f"comma-separated subset of {', '.join(CHECKS)}")
    p.add_argument("--trajectory", type=Path, default=None, help="trajectory CSV written by 'solve'")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        args.out.mkdir(parents=True, exist_ok=True)
        t0 = time.perf_counter()
        code = COMMANDS[args.command](cfg, args)
        log.info("%s finished in %.3f s", args.command, time.perf_counter() - t0)
        return code
    except StepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except RiccatiError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
