"""Time integration of the Riccati seed system (P, Q, R) and of P from arbitrary data.

The seed system is::

    P' = A^T P + P A + P S P + C,   P(0) = M
    Q' = A^T Q + P S Q,             Q(0) = -M
    R' = Q^T S Q,                   R(0) = M

with ``S = sigma sigma^T``. Integration is explicit Dormand-Prince with the
norm of P and the coercivity of ``P - M`` monitored after every step.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.linalg import expm

from .errors import CoercivityLost, FiniteEscape, NotAdmissible
from .linalg import as_sym, coercivity_margin
from .ode import dopri5
from .problem import ProblemSpec

log = logging.getLogger(__name__)

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12
DEFAULT_CEILING = 1e6
DEFAULT_EPS_C = 1e-10
# spacing of the uniform checkpoint grid used by the mild-solution quadrature
CHECKPOINT_SPACING = 0.0025
TIME_MATCH = 1e-12


def riccati_rhs(P, spec: ProblemSpec) -> np.ndarray:
    A = spec.A
    PA = P @ A
    return as_sym(PA.T + PA + P @ spec.sigma_sigma_t @ P + spec.C)


def aux_rhs(P, Q, spec: ProblemSpec) -> tuple[np.ndarray, np.ndarray]:
    S = spec.sigma_sigma_t
    SQ = S @ Q
    dQ = spec.A.T @ Q + P @ SQ
    dR = as_sym(Q.T @ SQ)
    return dQ, dR


@dataclass(frozen=True)
class EscapeReport:
    escaped: bool
    t_escape_lower: float
    norm_history: list[tuple[float, float]] = field(default_factory=list)


@dataclass(frozen=True)
class SeedTrajectory:
    """Checkpointed seed solution. Arrays are indexed ``[checkpoint, i, j]``."""

    spec: ProblemSpec
    times: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    dP: np.ndarray
    dQ: np.ndarray
    dR: np.ndarray
    tau_star: float
    spacing: float
    stop_reason: str = "done"
    n_steps: int = 0

    def index(self, t: float) -> int:
        i = int(np.searchsorted(self.times, t - TIME_MATCH))
        if i >= len(self.times) or abs(self.times[i] - t) > TIME_MATCH * max(1.0, abs(t)) * 10:
            raise KeyError(f"t={t!r} is not a stored checkpoint")
        return i

    def at(self, t: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        i = self.index(t)
        return self.P[i], self.Q[i], self.R[i]

    def interpolator(self):
        """Cubic Hermite interpolant ``s -> (P(s), Q(s))`` over the checkpoints."""
        n = self.spec.dim
        k = len(self.times)
        y = np.concatenate([self.P.reshape(k, -1), self.Q.reshape(k, -1)], axis=1)
        dy = np.concatenate([self.dP.reshape(k, -1), self.dQ.reshape(k, -1)], axis=1)
        spline = CubicHermiteSpline(self.times, y, dy, axis=0, extrapolate=False)
        t_max = float(self.times[-1])

        def interp(s: float) -> tuple[np.ndarray, np.ndarray]:
            if s < -TIME_MATCH or s > t_max + TIME_MATCH:
                raise ValueError(f"interpolation time {s} outside checkpoint range [0, {t_max}]")
            v = spline(min(max(s, 0.0), t_max))
            return v[: n * n].reshape(n, n), v[n * n:].reshape(n, n)

        return interp

    def rows(self):
        """(t, |P|_F, |Q|_F, |R|_F, margin(P - M)) per checkpoint."""
        M = self.spec.M
        for t, P, Q, R in zip(self.times, self.P, self.Q, self.R):
            yield (float(t), float(np.linalg.norm(P)), float(np.linalg.norm(Q)),
                   float(np.linalg.norm(R)), coercivity_margin(P - M))


def _checkpoint_grid(t_end: float, spacing: float, extra) -> tuple[float, list[float]]:
    n = max(2, math.ceil(t_end / spacing - 1e-9))
    n += n % 2
    step = t_end / n
    pts = {j * step for j in range(1, n + 1)}
    for s in extra:
        s = float(s)
        if 0 < s <= t_end and all(abs(s - p) > TIME_MATCH * 10 for p in pts):
            pts.add(s)
    return step, sorted(pts)


class _Monitor:
    def __init__(self, spec, n, ceiling, eps_c, delta_min, anchor):
        self.spec, self.n = spec, n
        self.ceiling, self.eps_c, self.delta_min = ceiling, eps_c, delta_min
        self.anchor = anchor
        self.history: list[tuple[float, float]] = []
        self.failure: str | None = None
        self.fail_t = math.nan
        self.fail_margin = math.nan
        self.t_good = 0.0

    def __call__(self, t, y):
        P = y[: self.n * self.n].reshape(self.n, self.n)
        norm = float(np.linalg.norm(P))
        self.history.append((t, norm))
        if not np.isfinite(norm) or norm > self.ceiling:
            self.failure, self.fail_t = "escape", t
            return True
        if t > 0 and t >= self.delta_min:
            margin = coercivity_margin(P - self.anchor)
            if margin <= self.eps_c:
                self.failure, self.fail_t, self.fail_margin = "coercivity", t, margin
                return True
        self.t_good = t
        return False


def _run(spec, rhs, y0, t_end, checkpoints, rtol, atol, ceiling, eps_c, delta_min, spacing, anchor):
    step, stops = _checkpoint_grid(t_end, spacing, checkpoints)
    mon = _Monitor(spec, spec.dim, ceiling, eps_c, delta_min, anchor)
    res = dopri5(rhs, 0.0, y0, t_end, rtol=rtol, atol=atol, stops=stops, on_step=mon)
    if res.status == "underflow" and mon.failure is None:
        # step size collapsed: blow-up ahead of the last accepted time
        mon.failure, mon.fail_t = "escape", res.t_last
    elif res.status == "max_steps" and mon.failure is None:
        raise RuntimeError(f"integration exceeded step budget at t={res.t_last}")
    return res, mon, step


def _collect(res, mon, n):
    keep = [i for i, t in enumerate(res.t) if mon.failure is None or t <= mon.t_good]
    times = np.array([res.t[i] for i in keep])
    Y = np.array([res.y[i] for i in keep])
    dY = np.array([res.dy[i] for i in keep])
    return times, Y.reshape(len(keep), -1, n, n), dY.reshape(len(keep), -1, n, n)


def _raise_or_warn(mon, strict, partial):
    if mon.failure is None:
        return
    if mon.failure == "escape":
        report = EscapeReport(True, mon.fail_t, list(mon.history))
        if strict:
            raise FiniteEscape(report, trajectory=partial)
        log.warning("finite escape detected near t=%.6g; horizon shrunk", mon.fail_t)
    else:
        if strict:
            raise CoercivityLost(mon.fail_t, mon.fail_margin, trajectory=partial)
        log.warning("coercivity lost at t=%.6g; horizon shrunk", mon.fail_t)


def integrate_seed(
    spec: ProblemSpec,
    t_end: float,
    checkpoints=(),
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    ceiling: float = DEFAULT_CEILING,
    eps_c: float = DEFAULT_EPS_C,
    delta_min: float = 0.0,
    spacing: float = CHECKPOINT_SPACING,
    strict: bool = True,
) -> SeedTrajectory:
    """Integrate the coupled (P, Q, R) system from (M, -M, M) to ``t_end``.

    Checkpoints are a uniform grid (spacing at most ``spacing``) plus any
    extra requested times. On escape or loss of coercivity the trajectory is
    truncated to the last validated checkpoint; with ``strict`` the typed
    error is raised carrying that truncated trajectory.
    """
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    n = spec.dim
    M = spec.M

    def rhs(t, y):
        P = y[: n * n].reshape(n, n)
        Q = y[n * n: 2 * n * n].reshape(n, n)
        dQ, dR = aux_rhs(P, Q, spec)
        return np.concatenate([riccati_rhs(P, spec).ravel(), dQ.ravel(), dR.ravel()])

    y0 = np.concatenate([M.ravel(), (-M).ravel(), M.ravel()])
    res, mon, step = _run(spec, rhs, y0, t_end, checkpoints, rtol, atol, ceiling, eps_c,
                          delta_min, spacing, M)
    times, Y, dY = _collect(res, mon, n)
    tau = float(times[-1]) if mon.failure else float(t_end)
    traj = SeedTrajectory(
        spec=spec, times=times,
        P=np.array([as_sym(p) for p in Y[:, 0]]), Q=Y[:, 1].copy(),
        R=np.array([as_sym(r) for r in Y[:, 2]]),
        dP=dY[:, 0].copy(), dQ=dY[:, 1].copy(), dR=dY[:, 2].copy(),
        tau_star=tau, spacing=step, stop_reason=mon.failure or "done", n_steps=res.n_steps,
    )
    _raise_or_warn(mon, strict, traj)
    return traj


def integrate_direct(
    spec: ProblemSpec,
    M_tilde,
    t_end: float,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    ceiling: float = DEFAULT_CEILING,
    eps_c: float = DEFAULT_EPS_C,
    spacing: float = CHECKPOINT_SPACING,
    check_admissible: bool = True,
) -> np.ndarray:
    """P(t_end) by direct Dormand-Prince integration from ``P(0) = M_tilde``."""
    M_tilde = as_sym(M_tilde)
    if check_admissible:
        margin = coercivity_margin(M_tilde - spec.M)
        if margin <= 0:
            raise NotAdmissible(f"M_tilde - M is not coercive (margin {margin:.3e})")
    if t_end == 0:
        return M_tilde.copy()
    if t_end < 0:
        raise ValueError("t_end must be non-negative")
    n = spec.dim

    def rhs(t, y):
        return riccati_rhs(y.reshape(n, n), spec).ravel()

    # coercivity of P - M is only meaningful for admissible data
    delta_min = 0.0 if check_admissible else math.inf
    res, mon, _ = _run(spec, rhs, M_tilde.ravel(), t_end, (), rtol, atol, ceiling, eps_c,
                       delta_min, max(spacing, t_end), spec.M)
    _raise_or_warn(mon, True, None)
    return as_sym(res.y[-1].reshape(n, n))


def _simpson_weights(k: int) -> np.ndarray:
    """Composite Newton-Cotes weights on k+1 equispaced points (unit spacing)."""
    w = np.zeros(k + 1)
    if k == 0:
        return w
    if k == 1:
        w[:] = 0.5
        return w
    m = k if k % 2 == 0 else k - 3
    if m > 0:
        w[0:m + 1:2] += 2 / 3
        w[1:m:2] += 4 / 3
        w[0] -= 1 / 3
        w[m] -= 1 / 3
    if k % 2:
        w[m:m + 4] += np.array([3, 9, 9, 3]) / 8
    return w


def mild_residual(traj: SeedTrajectory, t: float) -> float:
    """Frobenius distance of P(t) from its variation-of-constants expression.

    The integral is composite Simpson over the uniform checkpoints in
    ``[0, t]``; exponentials come from ``scipy.linalg.expm``.
    """
    spec = traj.spec
    k_float = t / traj.spacing
    k = int(round(k_float))
    if abs(k - k_float) > 1e-8:
        raise ValueError(f"t={t} is not on the uniform checkpoint grid (spacing {traj.spacing})")
    if k == 0:
        return 0.0
    try:
        idx = [traj.index(j * traj.spacing) if j else 0 for j in range(k + 1)]
    except KeyError as exc:
        raise ValueError(f"insufficient checkpoints for mild residual: {exc}") from None
    S = spec.sigma_sigma_t
    E = expm(spec.A * traj.spacing)
    powers = [np.eye(spec.dim)]
    for _ in range(k):
        powers.append(powers[-1] @ E)
    w = _simpson_weights(k) * traj.spacing
    total = powers[k].T @ traj.P[0] @ powers[k]
    for j, i in enumerate(idx):
        P = traj.P[i]
        G = P @ S @ P + spec.C
        Ej = powers[k - j]
        total = total + w[j] * (Ej.T @ G @ Ej)
    return float(np.linalg.norm(traj.P[idx[-1]] - total))


def conservative_horizon(spec: ProblemSpec, T: float = 1.0, samples: int = 201) -> float:
    """A-priori lower bound on the existence horizon from the contraction argument.

    ``a = |M|``, ``b = |sigma sigma^T|``, ``M_T = max_t |exp(A t)|`` on a
    sample of ``[0, T]``, ``r = 2 M_T^2 a (1 + 1e-6)``; returns
    ``min(a / (r^2 b + |C|), 1 / (4 r M_T^2 b))``.
    """
    a = float(np.linalg.norm(spec.M, 2))
    b = float(np.linalg.norm(spec.sigma_sigma_t, 2))
    c = float(np.linalg.norm(spec.C, 2))
    m_t = max(float(np.linalg.norm(expm(spec.A * s), 2)) for s in np.linspace(0.0, T, samples))
    r = 2 * m_t ** 2 * a * (1 + 1e-6)
    first = a / (r ** 2 * b + c) if (r ** 2 * b + c) > 0 else math.inf
    second = 1 / (4 * r * m_t ** 2 * b) if b > 0 else math.inf
    return min(first, second)
