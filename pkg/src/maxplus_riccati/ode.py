"""Dormand-Prince 5(4) integrator with PI step-size control.

Steps are clipped so the integrator lands exactly on every requested stop
time; the state and its derivative are recorded there (enough for cubic
Hermite interpolation between stops).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

# Butcher tableau (Hairer, Norsett & Wanner, table 5.2)
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40

SAFETY = 0.9
FAC_MIN, FAC_MAX = 0.2, 10.0
BETA = 0.04
ALPHA = 0.2 - 0.75 * BETA


@dataclass
class OdeResult:
    t: list[float] = field(default_factory=list)
    y: list[np.ndarray] = field(default_factory=list)
    dy: list[np.ndarray] = field(default_factory=list)
    status: str = "running"  # done | halted | underflow | max_steps
    t_last: float = 0.0
    y_last: np.ndarray | None = None
    n_steps: int = 0
    n_rejected: int = 0


def _initial_step(f, t0, y0, f0, rtol, atol, t_span):
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, t_span)
    f1 = f(t0 + h0, y0 + h0 * f0)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, t_span)


def dopri5(
    f: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0: np.ndarray,
    t_end: float,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    stops=(),
    on_step: Callable[[float, np.ndarray], bool] | None = None,
    h0: float | None = None,
    max_steps: int = 1_000_000,
) -> OdeResult:
    """Integrate ``y' = f(t, y)`` from ``t0`` to ``t_end``.

    ``stops`` are extra output times in ``(t0, t_end)``; ``t0`` and
    ``t_end`` are always recorded. ``on_step(t, y)`` runs after each
    accepted step and may return True to halt early.
    """
    y = np.array(y0, dtype=float)
    t = float(t0)
    out = OdeResult()
    fy = f(t, y)
    out.t.append(t)
    out.y.append(y.copy())
    out.dy.append(fy.copy())
    if t_end <= t0:
        out.status, out.t_last, out.y_last = "done", t, y
        return out

    targets = sorted({float(s) for s in stops if t0 < s < t_end} | {float(t_end)})
    span = t_end - t0
    h = h0 if h0 is not None else _initial_step(f, t, y, fy, rtol, atol, span)
    err_old = 1e-4
    k = 0
    while k < len(targets):
        if out.n_steps + out.n_rejected >= max_steps:
            out.status = "max_steps"
            break
        target = targets[k]
        remaining = target - t
        lands = h >= remaining * (1 - 1e-12)
        step = remaining if lands else h
        if step <= 1e-14 * max(1.0, abs(t)):
            out.status = "underflow"
            break

        k1 = fy
        k2 = f(t + C2 * step, y + step * (A21 * k1))
        k3 = f(t + C3 * step, y + step * (A31 * k1 + A32 * k2))
        k4 = f(t + C4 * step, y + step * (A41 * k1 + A42 * k2 + A43 * k3))
        k5 = f(t + C5 * step, y + step * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))
        k6 = f(t + step, y + step * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))
        y_new = y + step * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
        k7 = f(t + step, y_new)
        err_vec = step * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))

        if not np.isfinite(err):
            h = step * FAC_MIN
            out.n_rejected += 1
            continue
        if err <= 1.0:
            err = max(err, 1e-10)
            fac = SAFETY * err ** -ALPHA * err_old ** BETA
            fac = min(FAC_MAX, max(FAC_MIN, fac))
            err_old = err
            t = target if lands else t + step
            y, fy = y_new, k7
            out.n_steps += 1
            # a clipped landing step says nothing about the controller's preferred h
            clipped = step < h * (1 - 1e-12)
            h = h * min(1.0, fac) if clipped else step * fac
            if lands:
                out.t.append(t)
                out.y.append(y.copy())
                out.dy.append(fy.copy())
                k += 1
            if on_step is not None and on_step(t, y):
                out.status = "halted"
                break
        else:
            fac = max(FAC_MIN, SAFETY * err ** -ALPHA)
            h = step * fac
            out.n_rejected += 1
    else:
        out.status = "done"
    out.t_last, out.y_last = t, y
    return out
