"""Problem data (A, sigma, C, M) and the discretized transport example.

Operators act on nodal values at the interior nodes of a uniform grid on
``(0, length)``. Quadrature weights are folded into the matrices, so
composition of integral operators is a plain matrix product, and with the
inner product ``<x, y> = h * sum(x * y)`` the adjoint is the transpose.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .linalg import as_sym, coercivity_margin
from .errors import ConfigError

log = logging.getLogger(__name__)

PSD_TOL = 1e-10


@dataclass(frozen=True)
class Grid:
    n: int
    length: float = 2.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 4:
            raise ValueError(f"grid needs n >= 4 interior nodes, got {self.n}")
        if not self.length > 0:
            raise ValueError("grid length must be positive")

    @property
    def h(self) -> float:
        return self.length / (self.n + 1)

    @property
    def nodes(self) -> np.ndarray:
        return self.h * np.arange(1, self.n + 1)

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.n, self.h)


@dataclass(frozen=True)
class ProblemSpec:
    """Riccati data ``P' = A^T P + P A + P sigma sigma^T P + C`` with anchor ``M``.

    ``weight`` is the scalar inner-product weight (``h`` for grid problems,
    1 for custom matrix problems without a grid).
    """

    A: np.ndarray
    sigma: np.ndarray
    C: np.ndarray
    M: np.ndarray
    grid: Grid | None = None
    label: str = "custom"
    require_invertible: bool = True
    cond_A: float = field(init=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        sigma = np.atleast_2d(np.asarray(self.sigma, dtype=float))
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError(f"A must be square, got {A.shape}")
        if sigma.shape[0] != n:
            raise ValueError(f"sigma must have {n} rows, got {sigma.shape}")
        C = as_sym(np.atleast_2d(self.C), atol=1e-8)
        M = as_sym(np.atleast_2d(self.M), atol=1e-8)
        if C.shape != (n, n) or M.shape != (n, n):
            raise ValueError("C and M must match the shape of A")
        if coercivity_margin(C) < -PSD_TOL:
            raise ValueError("C must be positive semidefinite")
        cond = float(np.linalg.cond(A))
        if self.require_invertible and not np.isfinite(cond):
            raise ValueError("A must be invertible")
        if self.grid is not None and self.grid.n != n:
            raise ValueError("grid size does not match operator size")
        for name, val in (("A", A), ("sigma", sigma), ("C", C), ("M", M)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "cond_A", cond)

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    @property
    def weight(self) -> float:
        return self.grid.h if self.grid is not None else 1.0

    @property
    def sigma_sigma_t(self) -> np.ndarray:
        return self.sigma @ self.sigma.T

    def inner(self, x, y) -> float:
        return self.weight * float(np.dot(x, y))

    def with_anchor(self, M) -> "ProblemSpec":
        return ProblemSpec(self.A, self.sigma, self.C, M, grid=self.grid, label=self.label,
                           require_invertible=self.require_invertible)


def build_transport_A(grid: Grid) -> np.ndarray:
    """Matrix of ``-(2 + d/deta)`` with upwind differences and inflow value 0 at eta=0."""
    n, h = grid.n, grid.h
    D = (np.eye(n) - np.eye(n, k=-1)) / h
    return -2.0 * np.eye(n) - D


def build_sigma(grid: Grid) -> np.ndarray:
    return np.eye(grid.n) / np.sqrt(2.0)


def build_C(grid: Grid) -> np.ndarray:
    """``x -> (1/3) * integral of x``, evaluated at every node."""
    return np.full((grid.n, grid.n), grid.h / 3.0)


def build_M_anchor(grid: Grid, m: float = -0.1) -> np.ndarray:
    if not m < 0:
        raise ValueError(f"anchor scale m must be negative, got {m}")
    return m * np.eye(grid.n)


def build_kernel_operator(grid: Grid, K) -> np.ndarray:
    """Fold kernel samples ``K[i, j] = K(eta_i, zeta_j)`` with the quadrature weight."""
    K = np.asarray(K, dtype=float)
    if K.shape != (grid.n, grid.n):
        raise ValueError(f"kernel samples must be {grid.n}x{grid.n}")
    try:
        K = as_sym(K, atol=1e-8)
    except ValueError as exc:
        raise ValueError(f"kernel is not symmetric: {exc}") from None
    return K * grid.h


def transport_problem(n: int = 32, m: float = -0.1, length: float = 2.0) -> ProblemSpec:
    grid = Grid(n, length)
    spec = ProblemSpec(
        A=build_transport_A(grid),
        sigma=build_sigma(grid),
        C=build_C(grid),
        M=build_M_anchor(grid, m),
        grid=grid,
        label="transport",
    )
    drift = anchor_drift_margin(spec)
    if drift <= 0:
        log.warning("initial drift P'(0) is not coercive (margin %.3e)", drift)
    return spec


def anchor_drift_margin(spec: ProblemSpec) -> float:
    """Smallest eigenvalue of ``A^T M + M A + M sigma sigma^T M + C``."""
    M = spec.M
    drift = spec.A.T @ M + M @ spec.A + M @ spec.sigma_sigma_t @ M + spec.C
    return coercivity_margin(drift)


def admissible_family(spec: ProblemSpec, eps: float, rng: np.random.Generator | None = None) -> np.ndarray:
    """``M + eps*I + G G^T * w`` with ``G`` standard normal when ``rng`` is given."""
    n = spec.dim
    Mt = spec.M + eps * np.eye(n)
    if rng is not None:
        G = rng.standard_normal((n, n))
        Mt = Mt + G @ G.T * spec.weight
    return as_sym(Mt)


def load_problem(config) -> ProblemSpec:
    """Assemble a :class:`ProblemSpec` from a :class:`~maxplus_riccati.config.Config`."""
    from .io import read_matrix

    if config.problem_name == "transport":
        try:
            return transport_problem(config.grid_n, config.anchor_m, config.grid_length)
        except ValueError as exc:
            field_name = "anchor.m" if "anchor" in str(exc) else "grid.n"
            raise ConfigError(f"{field_name}: {exc}") from None

    mats = {}
    for key in ("A", "sigma", "C", "M"):
        path = config.custom.get(key)
        if path is None:
            raise ConfigError(f"custom.{key}: required when problem.name=custom")
        try:
            mats[key] = read_matrix(Path(path))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"custom.{key}: {exc}") from None
    try:
        return ProblemSpec(mats["A"], mats["sigma"], mats["C"], mats["M"], label="custom")
    except ValueError as exc:
        raise ConfigError(f"custom: {exc}") from None
