"""Max-plus dual-space propagation of Riccati solutions.

A kernel triple ``(B11, B12, B22)`` at horizon ``t`` represents the
quadratic bi-functional::

    B_t(y, z) = 1/2 <y, B11 y> + <z, B12 y> + 1/2 <z, B22 z>

Kernels are built once from the seed trajectory, composed (max-plus
product of integral operators) to reach the target horizon, and then applied
to the dual of any admissible initial datum ``M_tilde``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CoercivityLost, NotAdmissible, UnboundedComposition, UnboundedReconstruction
from .linalg import DEFAULT_PINV_REL_TOL, as_sym, check_nonpositive, coercivity_margin, pseudo_inverse
from .riccati import DEFAULT_EPS_C, SeedTrajectory

NONPOS_TOL = 1e-8


@dataclass(frozen=True)
class KernelTriple:
    B11: np.ndarray
    B12: np.ndarray
    B22: np.ndarray
    t: float
    compositions: int = 0

    def __post_init__(self):
        B11 = as_sym(self.B11, atol=1e-9 * max(1.0, float(np.abs(self.B11).max())))
        B22 = as_sym(self.B22, atol=1e-9 * max(1.0, float(np.abs(self.B22).max())))
        B12 = np.asarray(self.B12, dtype=float)
        if B12.shape != B11.shape or B22.shape != B11.shape:
            raise ValueError("kernel blocks must share one square shape")
        if not self.t > 0:
            raise ValueError("kernel horizon must be positive")
        for name, val in (("B11", B11), ("B12", B12), ("B22", B22)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    def __call__(self, y, z) -> float:
        y = np.asarray(y, dtype=float)
        z = np.asarray(z, dtype=float)
        return 0.5 * float(y @ self.B11 @ y) + float(z @ self.B12 @ y) + 0.5 * float(z @ self.B22 @ z)

    def max_rel_diff(self, other: "KernelTriple") -> float:
        """Largest block-wise relative Frobenius difference."""
        return max(
            float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))
            for a, b in ((self.B11, other.B11), (self.B12, other.B12), (self.B22, other.B22))
        )


@dataclass(frozen=True)
class DualQuad:
    """The dual functional ``z -> -1/2 <z, N z>``."""

    N: np.ndarray
    crosscheck: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "N", as_sym(self.N))

    def __call__(self, z) -> float:
        z = np.asarray(z, dtype=float)
        return -0.5 * float(z @ self.N @ z)


def seed_kernel(traj: SeedTrajectory, delta: float, eps_c: float = DEFAULT_EPS_C) -> KernelTriple:
    """Kernel at horizon ``delta`` from the seed checkpoint P, Q, R(delta)."""
    if not delta > 0:
        raise CoercivityLost(delta, 0.0)
    if delta > traj.tau_star * (1 + 1e-12):
        raise CoercivityLost(delta, float("nan"))
    P, Q, R = traj.at(delta)
    M = traj.spec.M
    G = P - M
    margin = coercivity_margin(G)
    if margin <= eps_c:
        raise CoercivityLost(delta, margin)
    GM = np.linalg.solve(G, M)
    GQ = np.linalg.solve(G, Q)
    B11 = -M - M @ GM
    B12 = -Q.T @ GM
    B22 = -Q.T @ GQ + R
    return KernelTriple(as_sym(B11), B12, as_sym(B22), t=float(delta))


def _spectrum_report(F, rel_tol) -> dict:
    lam = np.abs(np.linalg.eigvalsh(F))
    top = float(lam.max())
    kept = lam > rel_tol * top
    return {
        "max_abs_eig": top,
        "min_kept_abs_eig": float(lam[kept].min()) if kept.any() else 0.0,
        "rank": int(kept.sum()),
        "dim": int(lam.size),
    }


def compose(B_tau: KernelTriple, B_t: KernelTriple, rel_tol: float = DEFAULT_PINV_REL_TOL,
            diagnostics: list | None = None) -> KernelTriple:
    """Kernel of ``B_tau (x) B_t``: sup over the middle variable, horizon ``tau + t``."""
    inner = B_tau.B22 + B_t.B11
    ok, top = check_nonpositive(inner, NONPOS_TOL)
    if not ok:
        raise UnboundedComposition(
            f"B22(tau) + B11(t) has positive eigenvalue {top:.3e} (tau={B_tau.t:g}, t={B_t.t:g})"
        )
    if diagnostics is not None:
        diagnostics.append({"where": f"compose t={B_tau.t + B_t.t:.6g}", **_spectrum_report(inner, rel_tol)})
    S = pseudo_inverse(inner, rel_tol)
    S_B12 = S @ B_tau.B12
    B11 = B_tau.B11 - B_tau.B12.T @ S_B12
    B12 = -B_t.B12 @ S_B12
    B22 = B_t.B22 - B_t.B12 @ S @ B_t.B12.T
    # a squared kernel shares its operand, so its history counts once
    prior = B_tau.compositions if B_tau is B_t else B_tau.compositions + B_t.compositions
    return KernelTriple(as_sym(B11), B12, as_sym(B22), t=B_tau.t + B_t.t, compositions=prior + 1)


def iterate_linear(B_delta: KernelTriple, kappa: int, rel_tol: float = DEFAULT_PINV_REL_TOL,
                   diagnostics: list | None = None) -> KernelTriple:
    """``B_delta`` composed with itself ``kappa - 1`` times, one step at a time."""
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    hat = B_delta
    for k in range(2, kappa + 1):
        try:
            hat = compose(B_delta, hat, rel_tol, diagnostics)
        except UnboundedComposition as exc:
            raise UnboundedComposition(f"linear iteration k={k}: {exc}") from None
    return hat


def iterate_doubling(B_delta: KernelTriple, k: int, rel_tol: float = DEFAULT_PINV_REL_TOL,
                     diagnostics: list | None = None) -> KernelTriple:
    """Square the kernel ``k`` times, reaching horizon ``2**k * delta``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    B = B_delta
    for i in range(1, k + 1):
        try:
            B = compose(B, B, rel_tol, diagnostics)
        except UnboundedComposition as exc:
            raise UnboundedComposition(f"doubling step {i}: {exc}") from None
    return B


def _dual(X, M, eps_c: float) -> DualQuad:
    X = as_sym(X)
    G = X - M
    margin = coercivity_margin(G)
    if margin <= eps_c:
        raise NotAdmissible(f"initial datum minus anchor is not coercive (margin {margin:.3e})")
    N = M + M @ np.linalg.solve(G, M)
    N_alt = M @ np.linalg.solve(G, X)
    rel = float(np.linalg.norm(N - N_alt) / max(np.linalg.norm(N), 1e-300))
    return DualQuad(N, crosscheck=rel)


def dual_of_terminal(M_tilde, M, eps_c: float = DEFAULT_EPS_C) -> DualQuad:
    """Semiconvex dual of ``x -> 1/2 <x, M_tilde x>``.

    ``N = M + M (M_tilde - M)^-1 M``; the equivalent ``M (M_tilde - M)^-1 M_tilde``
    is evaluated too and its relative discrepancy stored in ``crosscheck``.
    """
    return _dual(M_tilde, M, eps_c)


def dual_of_value(P_t, M, eps_c: float = DEFAULT_EPS_C) -> DualQuad:
    return _dual(P_t, M, eps_c)


def maxplus_apply(B: KernelTriple, a: DualQuad, rel_tol: float = DEFAULT_PINV_REL_TOL,
                  diagnostics: list | None = None) -> DualQuad:
    """``y -> sup_z B(y, z) + a(z)``, returned as ``DualQuad(-T)`` with

    ``T = B11 - B12^T (B22 - N)^+ B12``.
    """
    inner = B.B22 - a.N
    ok, top = check_nonpositive(inner, NONPOS_TOL)
    if not ok:
        raise UnboundedReconstruction(f"B22 - N has positive eigenvalue {top:.3e}")
    if diagnostics is not None:
        diagnostics.append({"where": "B22 - N", **_spectrum_report(inner, rel_tol)})
    T = B.B11 - B.B12.T @ pseudo_inverse(inner, rel_tol) @ B.B12
    return DualQuad(-as_sym(T))


def undualize(a: DualQuad, M, rel_tol: float = DEFAULT_PINV_REL_TOL,
              diagnostics: list | None = None) -> np.ndarray:
    """Inverse dual: ``x -> sup_y psi(x, y) + a(y)`` is ``1/2 <x, O x>`` with

    ``O = M - M (M - N)^+ M``.
    """
    inner = M - a.N
    ok, top = check_nonpositive(inner, NONPOS_TOL)
    if not ok:
        raise UnboundedReconstruction(f"T + M has positive eigenvalue {top:.3e}")
    if diagnostics is not None:
        diagnostics.append({"where": "T + M", **_spectrum_report(inner, rel_tol)})
    return as_sym(M - M @ pseudo_inverse(inner, rel_tol) @ M)


def reconstruct(B_t: KernelTriple, M_tilde, M, rel_tol: float = DEFAULT_PINV_REL_TOL,
                eps_c: float = DEFAULT_EPS_C, diagnostics: list | None = None) -> np.ndarray:
    """Solution at horizon ``B_t.t`` started from ``M_tilde``."""
    a = dual_of_terminal(M_tilde, M, eps_c)
    return undualize(maxplus_apply(B_t, a, rel_tol, diagnostics), M, rel_tol, diagnostics)


def semiconvexity_certificate(P_t, M, alpha: float = 0.5) -> tuple[np.ndarray, bool]:
    """``K = -alpha P_t - (1 - alpha) M`` and whether ``P_t + K > 0`` and ``-K - M > 0``."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    K = as_sym(-alpha * np.asarray(P_t) - (1 - alpha) * np.asarray(M))
    ok = coercivity_margin(P_t + K) > 0 and coercivity_margin(-K - M) > 0
    return K, ok


def kernel_value_via_sup(traj: SeedTrajectory, t: float, y, z) -> float:
    """``-sup_x [psi(x, y) - W^z(t, x)]`` evaluated with :func:`maxplus_sup_quad`.

    Independent route to ``B_t(y, z)`` for orientation checks.
    """
    from .linalg import maxplus_sup_quad

    P, Q, R = traj.at(t)
    M = traj.spec.M
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    value, _ = maxplus_sup_quad(M - P, -(M @ y + Q @ z))
    const = 0.5 * float(y @ M @ y) - 0.5 * float(z @ R @ z)
    return -(value + const)
