"""Three-step propagation recipe.

1. integrate the seed to ``delta = t / kappa`` and build the kernel there;
2. iterate the kernel to horizon ``t`` (linear or doubling);
3. reconstruct the solution for each admissible ``M_tilde``.

Steps 1-2 run once per ``(t, kappa, mode)``; step 3 repeats per initial datum
and can fan out over threads since the kernel is immutable.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import RiccatiError
from .linalg import DEFAULT_PINV_REL_TOL, coercivity_margin
from .problem import ProblemSpec
from .riccati import DEFAULT_ATOL, DEFAULT_RTOL, integrate_seed
from .semigroup import KernelTriple, iterate_doubling, iterate_linear, reconstruct, seed_kernel

log = logging.getLogger(__name__)


class StepError(RiccatiError):
    """Wraps a typed error with the recipe step (1, 2 or 3) where it occurred."""

    def __init__(self, step: int, cause: RiccatiError):
        super().__init__(f"recipe step {step}: {cause}")
        self.step = step
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 1)


@dataclass
class Recipe:
    spec: ProblemSpec
    t: float
    kappa: int
    mode: str = "linear"
    rtol: float = DEFAULT_RTOL
    atol: float = DEFAULT_ATOL
    rel_tol: float = DEFAULT_PINV_REL_TOL
    kernel: KernelTriple | None = None
    clamped: bool = False
    seed_runs: int = 0
    kernel_builds: int = 0
    timings: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)

    def __post_init__(self):
        if self.kappa < 1:
            raise ValueError("kappa must be >= 1")
        if self.mode not in ("linear", "doubling"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "doubling" and self.kappa & (self.kappa - 1):
            raise ValueError(f"doubling mode needs kappa to be a power of two, got {self.kappa}")
        if not self.t > 0:
            raise ValueError("recipe horizon t must be positive")

    @property
    def delta(self) -> float:
        return self.t / self.kappa

    def prepare(self) -> KernelTriple:
        """Steps 1 and 2. Clamps ``t`` to the monitored horizon when the seed fails early."""
        if self.kernel is not None:
            return self.kernel
        t0 = time.perf_counter()
        try:
            traj = integrate_seed(self.spec, self.t, checkpoints=[self.delta], rtol=self.rtol,
                                  atol=self.atol, strict=False)
            self.seed_runs += 1
            if traj.tau_star < self.t:
                log.warning("requested t=%.6g exceeds validated horizon %.6g; clamping",
                            self.t, traj.tau_star)
                self.t = traj.tau_star
                self.clamped = True
                traj = integrate_seed(self.spec, self.t, checkpoints=[self.delta], rtol=self.rtol,
                                      atol=self.atol, strict=True)
                self.seed_runs += 1
            B_delta = seed_kernel(traj, self.delta)
        except RiccatiError as exc:
            raise StepError(1, exc) from exc
        t1 = time.perf_counter()
        try:
            if self.mode == "linear":
                B = iterate_linear(B_delta, self.kappa, self.rel_tol, self.diagnostics)
            else:
                B = iterate_doubling(B_delta, self.kappa.bit_length() - 1, self.rel_tol, self.diagnostics)
        except RiccatiError as exc:
            raise StepError(2, exc) from exc
        t2 = time.perf_counter()
        self.kernel_builds += 1
        self.timings["step1_s"] = t1 - t0
        self.timings["step2_s"] = t2 - t1
        self.kernel = B
        return B

    def solve(self, M_tilde) -> np.ndarray:
        B = self.prepare()
        try:
            return reconstruct(B, M_tilde, self.spec.M, self.rel_tol)
        except RiccatiError as exc:
            raise StepError(3, exc) from exc

    def solve_batch(self, M_tildes, threads: int = 1) -> list[np.ndarray]:
        self.prepare()
        t0 = time.perf_counter()
        if threads > 1 and len(M_tildes) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                out = list(pool.map(self.solve, M_tildes))
        else:
            out = [self.solve(Mt) for Mt in M_tildes]
        self.timings["step3_s"] = time.perf_counter() - t0
        return out

    def report(self, solutions) -> list[str]:
        lines = [
            f"t={self.t:.17g} kappa={self.kappa} mode={self.mode} delta={self.delta:.17g}"
            + (" (clamped)" if self.clamped else ""),
            f"compositions={self.kernel.compositions if self.kernel else 0}",
        ]
        for key in ("step1_s", "step2_s", "step3_s"):
            if key in self.timings:
                lines.append(f"{key}={self.timings[key]:.6f}")
        for d in self.diagnostics:
            lines.append(
                f"pinv {d['where']}: rank {d['rank']}/{d['dim']}, "
                f"|eig| in [{d['min_kept_abs_eig']:.3e}, {d['max_abs_eig']:.3e}]"
            )
        for i, P in enumerate(solutions):
            lines.append(f"solution[{i}] margin(P-M)={coercivity_margin(P - self.spec.M):.6e}")
        return lines
