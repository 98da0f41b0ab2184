"""Acceptance criteria 1-10, each at its stated tolerance.

Every test records one PASS/FAIL line; the lines are printed in the pytest
terminal summary (see conftest.py) and to stdout when run with ``-s``.
"""

import csv
import re
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from maxplus_riccati.cli import main
from maxplus_riccati.errors import FiniteEscape
from maxplus_riccati.linalg import coercivity_margin, maxplus_sup_quad, pseudo_inverse
from maxplus_riccati.problem import ProblemSpec, admissible_family, transport_problem
from maxplus_riccati.riccati import conservative_horizon, integrate_direct, integrate_seed, mild_residual
from maxplus_riccati.semigroup import (compose, dual_of_terminal, iterate_doubling, iterate_linear,
                                       reconstruct, seed_kernel, semiconvexity_certificate, undualize)
from maxplus_riccati.verify import simulate_closed_loop, suboptimality_probe, value_quadratic

from test_linalg import grid_sup, penrose_residuals


def record(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] AC{number:<2} {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def rel(a, b):
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def five_targets(spec):
    rng = np.random.default_rng(11)
    return ([admissible_family(spec, eps) for eps in (0.05, 0.2, 1.0)]
            + [admissible_family(spec, 0.2, rng) for _ in range(2)])


def test_ac01_recipe_matches_direct():
    worst_err, worst_time = 0.0, 0.0
    for n in (16, 32):
        spec = transport_problem(n)
        targets = five_targets(spec)
        direct = [integrate_direct(spec, Mt, 0.4) for Mt in targets]
        for kappa in (1, 2, 4, 8, 16):
            t0 = time.perf_counter()
            traj = integrate_seed(spec, 0.4, checkpoints=[0.4 / kappa])
            B = iterate_linear(seed_kernel(traj, 0.4 / kappa), kappa)
            sols = [reconstruct(B, Mt, spec.M) for Mt in targets]
            worst_time = max(worst_time, time.perf_counter() - t0)
            worst_err = max(worst_err, max(rel(P, D) for P, D in zip(sols, direct)))
    ok = worst_err <= 1e-5 and worst_time <= 10.0
    record(1, "recipe vs direct", ok,
           f"max rel err {worst_err:.2e} (tol 1e-5), slowest run {worst_time:.2f} s (limit 10 s)")


def test_ac02_semigroup_law(traj16):
    errs = [compose(seed_kernel(traj16, d), seed_kernel(traj16, d)).max_rel_diff(seed_kernel(traj16, 2 * d))
            for d in (0.05, 0.1)]
    record(2, "semigroup law", max(errs) <= 1e-6,
           f"rel err {errs[0]:.2e} (delta 0.05), {errs[1]:.2e} (delta 0.1), tol 1e-6")


def test_ac03_doubling_equals_linear(traj16):
    B = seed_kernel(traj16, 0.05)
    D, L = iterate_doubling(B, 3), iterate_linear(B, 8)
    err = D.max_rel_diff(L)
    ok = err <= 1e-8 and D.compositions == 3 and L.compositions == 7
    record(3, "doubling vs linear", ok,
           f"rel diff {err:.2e} (tol 1e-8), compositions {D.compositions} vs {L.compositions}")


def test_ac04_duality():
    spec = transport_problem(32)
    rng = np.random.default_rng(4)
    cross, roundtrip = 0.0, 0.0
    for _ in range(200):
        Mt = admissible_family(spec, rng.uniform(0.05, 1.0), rng)
        a = dual_of_terminal(Mt, spec.M)
        cross = max(cross, a.crosscheck)
        # O = M - M (M - N)^+ M recovers M_tilde
        roundtrip = max(roundtrip, rel(undualize(a, spec.M), Mt))
    ok = cross <= 1e-12 and roundtrip <= 1e-10
    record(4, "duality", ok, f"formula agreement {cross:.2e} (tol 1e-12), roundtrip {roundtrip:.2e} (tol 1e-10)")


def test_ac05_value_identity(traj16):
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(20):
        x, z = rng.standard_normal(16), rng.standard_normal(16)
        W = value_quadratic(traj16, 0.3, x, z)
        _, J = simulate_closed_loop(traj16, 0.3, x, z)
        worst = max(worst, abs(J - W) / max(1.0, abs(W)))
    x, z = rng.standard_normal(16), rng.standard_normal(16)
    excess = suboptimality_probe(traj16, 0.3, x, z, n_trials=100, seed=5, amplitude=0.5)
    ok = worst <= 1e-4 and excess <= 1e-6
    record(5, "value identity", ok,
           f"max |J-W|/max(1,|W|) {worst:.2e} (tol 1e-4), max J-W over 100 perturbations {excess:.2e} (tol 1e-6)")


def test_ac06_maxplus_sup_and_penrose():
    rng = np.random.default_rng(6)
    sup_err = 0.0
    for i in range(50):
        d = 1 + i % 3
        G = rng.standard_normal((d, d))
        F = -(G @ G.T) - 0.1 * np.eye(d)
        if d > 1 and i % 2:
            # rank-deficient case with xi in the range of F
            v = rng.standard_normal((d, 1))
            F = -(v @ v.T) - 0.5 * np.outer(*(2 * [rng.standard_normal(d)]))
        x_star = rng.uniform(-1, 1, d)
        xi = -F @ x_star
        value, _ = maxplus_sup_quad(F, xi)
        brute, _ = grid_sup(F, xi, L=2.5)
        sup_err = max(sup_err, abs(value - brute))
    pen = 0.0
    for i in range(1000):
        n = 1 + i % 16
        rank = rng.integers(0, n + 1)
        V, _ = np.linalg.qr(rng.standard_normal((n, n)))
        lam = np.zeros(n)
        lam[:rank] = rng.choice([-1.0, 1.0], rank) * 10 ** rng.uniform(-2, 0, rank)
        F = (V * lam) @ V.T
        F = 0.5 * (F + F.T)
        pen = max(pen, max(penrose_residuals(F, pseudo_inverse(F))) / max(1.0, np.linalg.norm(F)))
    ok = sup_err <= 1e-4 and pen <= 1e-9
    record(6, "max-plus sup / Penrose", ok,
           f"sup value err {sup_err:.2e} (tol 1e-4), Penrose residual {pen:.2e} (tol 1e-9)")


def test_ac07_mild_residual():
    traj = integrate_seed(transport_problem(32), 0.5)
    k = int(round(0.5 / traj.spacing))
    worst = max(mild_residual(traj, j * traj.spacing) / np.linalg.norm(traj.at(j * traj.spacing)[0])
                for j in range(1, k + 1))
    record(7, "mild-solution residual", worst <= 1e-5,
           f"max relative residual {worst:.2e} over {k} checkpoints (tol 1e-5)")


def test_ac08_finite_escape():
    spec = ProblemSpec([[0.0]], [[1.0]], [[0.0]], [[1.0]], require_invertible=False)
    t_low = None
    try:
        integrate_seed(spec, 2.0)
    except FiniteEscape as exc:
        t_low = exc.report.t_escape_lower
    ok = t_low is not None and 0.95 <= t_low <= 1.0
    record(8, "finite escape", ok, f"t_escape_lower {t_low} (expected in [0.95, 1.0])")


def test_ac09_coercivity_horizon():
    spec = transport_problem(32)
    traj = integrate_seed(spec, 0.5)
    inner = [(P, t) for t, P in zip(traj.times, traj.P) if t > 0]
    margin = min(coercivity_margin(P - spec.M) for P, _ in inner)
    certified = all(semiconvexity_certificate(P, spec.M)[1] for P, _ in inner)
    horizon = conservative_horizon(spec)
    ok = margin > 0 and certified and horizon <= traj.tau_star
    record(9, "coercivity horizon", ok,
           f"min margin {margin:.3e} > 0, semiconvexity ok={certified}, "
           f"conservative horizon {horizon:.4f} <= tau* {traj.tau_star:.4f}")


def test_ac10_benchmark_artifact(tmp_path):
    assert main(["bench", "--out", str(tmp_path)]) == 0
    with open(tmp_path / "bench.csv", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    linear = {int(r["kappa_or_k"]): r for r in rows if r["method"] == "recipe-linear"}
    doubling = {2 ** int(r["kappa_or_k"]): r for r in rows if r["method"] == "recipe-doubling"}
    checked = []
    for kappa in sorted(k for k in doubling if k >= 4):
        lin, dbl = linear[kappa], doubling[kappa]
        matched = float(lin["rel_error"]) <= 1e-4 and float(dbl["rel_error"]) <= 1e-4
        checked.append(matched and int(dbl["compositions"]) < int(lin["compositions"]))
    # tolerance -> error pairs are listed in the summary, loosest first
    summary = (tmp_path / "bench_summary.txt").read_text()
    pairs = re.findall(r"(\d+e-\d+)->(\S+?)[,)]", summary.splitlines()[-1])
    errs = [float(e) for _, e in pairs]
    csv_errs = sorted(float(r["rel_error"]) for r in rows if r["method"] == "direct-rk45")
    # the summary prints three significant digits
    same_rows = len(errs) == len(csv_errs) and np.allclose(sorted(errs), csv_errs, rtol=1e-2, atol=0)
    monotone = all(b <= a for a, b in zip(errs, errs[1:])) and same_rows
    ok = bool(checked) and all(checked) and monotone
    record(10, "benchmark artifact", ok,
           f"doubling fewer compositions for kappa in {sorted(k for k in doubling if k >= 4)}: {all(checked)}, "
           f"direct error monotone in tolerance: {monotone} ({', '.join(f'{t}->{e}' for t, e in pairs)})")
