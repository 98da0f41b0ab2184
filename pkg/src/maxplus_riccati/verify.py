"""Control-theoretic cross-checks of the seed solution.

The seed (P, Q, R) is the value of the finite-horizon problem

    W^z(t, x) = sup_w  int_0^t 1/2 <xi, C xi> - 1/2 |w|^2 ds + psi(xi(t), z),
    xi' = A xi + sigma w,  xi(0) = x,   psi(x, z) = 1/2 <x - z, M (x - z)>,

with optimal feedback ``w*(s) = sigma^T (P(t-s) xi(s) + Q(t-s) z)``. These
routines simulate that problem forward and compare against the quadratic
value formula.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ode import dopri5
from .riccati import SeedTrajectory


@dataclass(frozen=True)
class TrajectoryRecord:
    times: np.ndarray
    states: np.ndarray
    controls: np.ndarray
    running_payoff: float


def terminal_payoff(spec, x, z) -> float:
    d = np.asarray(x, dtype=float) - np.asarray(z, dtype=float)
    return 0.5 * spec.inner(d, spec.M @ d)


def value_quadratic(traj: SeedTrajectory, t: float, x, z) -> float:
    """``1/2 <x, P(t) x> + <x, Q(t) z> + 1/2 <z, R(t) z>`` in the grid inner product."""
    spec = traj.spec
    P, Q, R = traj.at(t)
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    return 0.5 * spec.inner(x, P @ x) + spec.inner(x, Q @ z) + 0.5 * spec.inner(z, R @ z)


def _simulate(traj, t, x, z, eta, rtol, atol):
    """Forward simulation with ``w = feedback + eta`` (eta piecewise constant).

    Returns the record, the payoff and ``1/2 int |eta|^2``.
    """
    spec = traj.spec
    n = spec.dim
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if t < 0 or t > traj.times[-1] + 1e-12:
        raise ValueError(f"horizon t={t} outside the trajectory range [0, {traj.times[-1]}]")
    if t == 0:
        rec = TrajectoryRecord(np.array([0.0]), x[None].copy(), np.zeros((1, spec.sigma.shape[1])), 0.0)
        return rec, terminal_payoff(spec, x, z), 0.0
    interp = traj.interpolator()
    w_weight = spec.weight
    pieces = len(eta)
    edges = np.linspace(0.0, t, pieces + 1)

    def control(s, xi, e):
        P, Q = interp(t - s)
        return spec.sigma.T @ (P @ xi + Q @ z) + e

    times, states, controls = [0.0], [x.copy()], [control(0.0, x, eta[0])]
    y = np.concatenate([x, [0.0]])
    for j in range(pieces):
        e = eta[j]

        def rhs(s, y, e=e):
            xi = y[:n]
            w = control(s, xi, e)
            running = 0.5 * w_weight * (xi @ spec.C @ xi) - 0.5 * w_weight * (w @ w)
            return np.concatenate([spec.A @ xi + spec.sigma @ w, [running]])

        res = dopri5(rhs, edges[j], y, edges[j + 1], rtol=rtol, atol=atol)
        if res.status != "done":
            raise RuntimeError(f"closed-loop integration failed on piece {j}: {res.status}")
        y = res.y[-1]
        times.append(edges[j + 1])
        states.append(y[:n].copy())
        controls.append(control(edges[j + 1], y[:n], e))
    running = float(y[n])
    rec = TrajectoryRecord(np.array(times), np.array(states), np.array(controls), running)
    payoff = running + terminal_payoff(spec, y[:n], z)
    dt = t / pieces
    eta_energy = 0.5 * w_weight * dt * float(sum(e @ e for e in eta))
    return rec, payoff, eta_energy


def simulate_closed_loop(traj: SeedTrajectory, t: float, x, z, pieces: int = 20,
                         rtol: float = 1e-10, atol: float = 1e-12) -> tuple[TrajectoryRecord, float]:
    """Payoff of the optimal feedback ``sigma^T (P(t-s) xi + Q(t-s) z)``."""
    eta = np.zeros((pieces, traj.spec.sigma.shape[1]))
    rec, payoff, _ = _simulate(traj, t, x, z, eta, rtol, atol)
    return rec, payoff


def perturbed_payoff(traj: SeedTrajectory, t: float, x, z, eta,
                     rtol: float = 1e-10, atol: float = 1e-12) -> tuple[float, float]:
    """Payoff of ``w = feedback + eta`` and the predicted deficit ``1/2 int |eta|^2``.

    ``eta`` has one row per equal-length piece of ``[0, t]``.
    """
    eta = np.atleast_2d(np.asarray(eta, dtype=float))
    _, payoff, energy = _simulate(traj, t, x, z, eta, rtol, atol)
    return payoff, energy


def suboptimality_probe(traj: SeedTrajectory, t: float, x, z, n_trials: int = 100, seed: int = 0,
                        amplitude: float = 0.5, pieces: int = 20,
                        rtol: float = 1e-10, atol: float = 1e-12) -> float:
    """Largest ``J(w) - W`` over random piecewise-constant perturbations of the optimal feedback."""
    rng = np.random.default_rng(seed)
    W = value_quadratic(traj, t, x, z)
    m = traj.spec.sigma.shape[1]
    worst = -np.inf
    for _ in range(n_trials):
        eta = amplitude * rng.standard_normal((pieces, m))
        J, _ = perturbed_payoff(traj, t, x, z, eta, rtol, atol)
        worst = max(worst, J - W)
    return float(worst)


CHECKS = (
    "value-identity",
    "suboptimality",
    "mild-residual",
    "coercivity",
    "semiconvexity",
    "semigroup-law",
    "duality",
    "recipe-oracle",
)


def run_checks(spec, cfg, seed: int = 0, only=None) -> list[tuple[str, float, float, bool]]:
    """Run the named checks; returns ``(name, metric, tolerance, passed)`` rows."""
    from .linalg import coercivity_margin
    from .problem import admissible_family
    from .riccati import integrate_direct, integrate_seed, mild_residual
    from .semigroup import (compose, dual_of_terminal, iterate_linear, reconstruct,
                            seed_kernel, semiconvexity_certificate)

    names = CHECKS if only is None else tuple(only)
    unknown = set(names) - set(CHECKS)
    if unknown:
        raise ValueError(f"unknown check(s): {sorted(unknown)}")
    rng = np.random.default_rng(seed)
    t_end = max(cfg.riccati_t_end, cfg.verify_t, cfg.recipe_t)
    kappa = cfg.recipe_kappa
    delta = 0.05
    traj = integrate_seed(spec, t_end, checkpoints=[cfg.verify_t, cfg.recipe_t / kappa, delta, 2 * delta],
                          rtol=cfg.riccati_rtol, atol=cfg.riccati_atol, ceiling=cfg.riccati_ceiling)
    rows = []
    n = spec.dim
    t = cfg.verify_t
    for name in names:
        if name == "value-identity":
            worst = 0.0
            for _ in range(cfg.verify_pairs):
                x, z = rng.standard_normal(n), rng.standard_normal(n)
                W = value_quadratic(traj, t, x, z)
                _, J = simulate_closed_loop(traj, t, x, z, pieces=cfg.verify_pieces)
                worst = max(worst, abs(J - W) / max(1.0, abs(W)))
            rows.append((name, worst, 1e-4, worst <= 1e-4))
        elif name == "suboptimality":
            x, z = rng.standard_normal(n), rng.standard_normal(n)
            excess = suboptimality_probe(traj, t, x, z, cfg.verify_trials, seed, cfg.verify_amplitude,
                                         cfg.verify_pieces)
            rows.append((name, excess, 1e-6, excess <= 1e-6))
        elif name == "mild-residual":
            k = int(round(cfg.riccati_t_end / traj.spacing))
            worst = 0.0
            for j in range(1, k + 1):
                s = j * traj.spacing
                worst = max(worst, mild_residual(traj, s) / np.linalg.norm(traj.at(s)[0]))
            rows.append((name, worst, 1e-5, worst <= 1e-5))
        elif name == "coercivity":
            margin = min(coercivity_margin(P - spec.M) for s, P in zip(traj.times, traj.P) if s > 0)
            rows.append((name, margin, 0.0, margin > 0))
        elif name == "semiconvexity":
            bad = sum(not semiconvexity_certificate(P, spec.M)[1]
                      for s, P in zip(traj.times, traj.P) if s > 0)
            rows.append((name, float(bad), 0.0, bad == 0))
        elif name == "semigroup-law":
            B = seed_kernel(traj, delta)
            err = compose(B, B, cfg.pinv_rel_tol).max_rel_diff(seed_kernel(traj, 2 * delta))
            rows.append((name, err, 1e-6, err <= 1e-6))
        elif name == "duality":
            worst = max(dual_of_terminal(admissible_family(spec, 0.2, rng), spec.M).crosscheck
                        for _ in range(20))
            rows.append((name, worst, 1e-12, worst <= 1e-12))
        elif name == "recipe-oracle":
            Mt = admissible_family(spec, 0.2, rng)
            B = iterate_linear(seed_kernel(traj, cfg.recipe_t / kappa), kappa, cfg.pinv_rel_tol)
            P = reconstruct(B, Mt, spec.M, cfg.pinv_rel_tol)
            D = integrate_direct(spec, Mt, cfg.recipe_t, rtol=cfg.riccati_rtol, atol=cfg.riccati_atol)
            err = float(np.linalg.norm(P - D) / np.linalg.norm(D))
            rows.append((name, err, 1e-5, err <= 1e-5))
    return rows
