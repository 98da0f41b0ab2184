"""Error-versus-time study: direct RK45 against the dual-space recipe."""

from __future__ import annotations

import csv
import time
from dataclasses import astuple, dataclass
from pathlib import Path

import numpy as np

from .problem import ProblemSpec
from .recipe import Recipe
from .riccati import DEFAULT_ATOL, DEFAULT_RTOL, integrate_direct

BENCH_COLUMNS = ["method", "t", "kappa_or_k", "compositions", "wall_time_s", "rel_error"]
METHODS = ("direct-rk45", "recipe-linear", "recipe-doubling")


@dataclass(frozen=True)
class BenchRecord:
    method: str
    t: float
    kappa_or_k: int
    compositions: int
    wall_time_s: float
    rel_error: float
    tolerance: float = 0.0  # integrator rtol for direct rows; not written to CSV

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not self.rel_error >= 0:
            raise ValueError("rel_error must be non-negative")
        expected = {"direct-rk45": 0, "recipe-linear": self.kappa_or_k - 1,
                    "recipe-doubling": self.kappa_or_k}[self.method]
        if self.compositions != expected:
            raise ValueError(f"{self.method}: compositions {self.compositions} != {expected}")


def _rel(P, ref) -> float:
    return float(np.linalg.norm(P - ref) / np.linalg.norm(ref))


def run_bench(spec: ProblemSpec, t: float, M_tilde, kappas=(2, 4, 8, 16),
              direct_rtols=(1e-3, 1e-5, 1e-7, 1e-9), reference_rtol: float = 1e-12,
              recipe_rtol: float = DEFAULT_RTOL, recipe_atol: float = DEFAULT_ATOL,
              rel_tol: float = 1e-10) -> list[BenchRecord]:
    """Sweep direct tolerances and recipe iteration counts; rows sorted by wall time."""
    reference = integrate_direct(spec, M_tilde, t, rtol=reference_rtol, atol=reference_rtol * 1e-2)
    records = []
    for rtol in direct_rtols:
        t0 = time.perf_counter()
        P = integrate_direct(spec, M_tilde, t, rtol=rtol, atol=rtol * 1e-2)
        wall = time.perf_counter() - t0
        records.append(BenchRecord("direct-rk45", t, 0, 0, wall, _rel(P, reference), tolerance=rtol))
    for kappa in kappas:
        modes = ["linear"] + (["doubling"] if kappa & (kappa - 1) == 0 else [])
        for mode in modes:
            recipe = Recipe(spec, t, kappa, mode, rtol=recipe_rtol, atol=recipe_atol, rel_tol=rel_tol)
            t0 = time.perf_counter()
            P = recipe.solve(M_tilde)
            wall = time.perf_counter() - t0
            label = kappa if mode == "linear" else kappa.bit_length() - 1
            records.append(BenchRecord(f"recipe-{mode}", t, label, recipe.kernel.compositions,
                                       wall, _rel(P, reference)))
    records.sort(key=lambda r: (r.wall_time_s, r.method, r.kappa_or_k))
    return records


def write_bench(path: Path, records) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BENCH_COLUMNS)
        for r in records:
            method, t, kk, comp, wall, err, _ = astuple(r)
            w.writerow([method, f"{t:.17g}", kk, comp, f"{wall:.6f}", f"{err:.6e}"])


def summarize(records, err_tol: float = 1e-4) -> list[str]:
    """Plain-text findings: doubling vs linear composition counts, direct error trend."""
    lines = []
    linear = {r.kappa_or_k: r for r in records if r.method == "recipe-linear"}
    doubling = {2 ** r.kappa_or_k: r for r in records if r.method == "recipe-doubling"}
    for kappa in sorted(set(linear) & set(doubling)):
        lin, dbl = linear[kappa], doubling[kappa]
        matched = lin.rel_error <= err_tol and dbl.rel_error <= err_tol
        fewer = dbl.compositions < lin.compositions
        lines.append(
            f"kappa={kappa}: doubling {dbl.compositions} vs linear {lin.compositions} compositions"
            f" -> doubling {'fewer' if fewer else 'not fewer'}"
            f" (errors {dbl.rel_error:.2e} / {lin.rel_error:.2e}, matched={matched})"
        )
    direct = sorted((r for r in records if r.method == "direct-rk45"), key=lambda r: -r.tolerance)
    errs = [r.rel_error for r in direct]
    mono = all(b <= a for a, b in zip(errs, errs[1:]))
    lines.append("direct-rk45 error decreases with tolerance: " + ("yes" if mono else "no")
                 + " (" + ", ".join(f"{r.tolerance:.0e}->{r.rel_error:.2e}" for r in direct) + ")")
    return lines
