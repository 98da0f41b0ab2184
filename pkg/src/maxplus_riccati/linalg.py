"""Symmetric spectral toolkit.

Symmetric operators are plain ``numpy`` arrays; :func:`as_sym` is the
ingestion point that validates shape and symmetrizes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EigenError, Unbounded

DEFAULT_PINV_REL_TOL = 1e-10


def as_sym(F, atol: float | None = None) -> np.ndarray:
    """Return ``(F + F.T) / 2`` as a float array.

    If ``atol`` is given, raise ``ValueError`` when ``F`` is further than
    ``atol`` (max-abs) from symmetric.
    """
    F = np.asarray(F, dtype=float)
    if F.ndim != 2 or F.shape[0] != F.shape[1] or F.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {F.shape}")
    if atol is not None:
        asym = float(np.max(np.abs(F - F.T)))
        if asym > atol:
            raise ValueError(f"matrix is not symmetric: max |F - F^T| = {asym:.3e} > {atol:.1e}")
    return 0.5 * (F + F.T)


def sym_eig(F) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric matrix, eigenvalues descending."""
    F = as_sym(F)
    try:
        lam, V = np.linalg.eigh(F)
    except np.linalg.LinAlgError as exc:
        cond = np.linalg.cond(F)
        raise EigenError(f"eigh did not converge (dim={F.shape[0]}, cond={cond:.3e})") from exc
    return lam[::-1].copy(), V[:, ::-1].copy()


def _cutoff(lam: np.ndarray, rel_tol: float) -> float:
    scale = float(np.max(np.abs(lam))) if lam.size else 0.0
    return rel_tol * scale


def pseudo_inverse(F, rel_tol: float = DEFAULT_PINV_REL_TOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse via a spectral cutoff relative to max |eigenvalue|."""
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    lam, V = sym_eig(F)
    cut = _cutoff(lam, rel_tol)
    keep = np.abs(lam) > cut
    inv = np.zeros_like(lam)
    inv[keep] = 1.0 / lam[keep]
    return as_sym((V * inv) @ V.T)


def coercivity_margin(F) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    return float(np.linalg.eigvalsh(as_sym(F))[0])


def check_nonpositive(F, rel_tol: float = 1e-8) -> tuple[bool, float]:
    """Whether ``F`` is negative semidefinite up to ``rel_tol * ||F||_2``.

    Returns ``(ok, largest eigenvalue)``.
    """
    lam = np.linalg.eigvalsh(as_sym(F))
    top = float(lam[-1])
    scale = float(np.max(np.abs(lam)))
    return top <= rel_tol * scale, top


@dataclass(frozen=True)
class QuadForm:
    """x -> 1/2 <x, F x> + <x, xi> + c (Euclidean pairing)."""

    F: np.ndarray
    xi: np.ndarray
    c: float = 0.0

    def __post_init__(self):
        F = as_sym(self.F)
        xi = np.asarray(self.xi, dtype=float).reshape(-1)
        if xi.shape[0] != F.shape[0]:
            raise ValueError("xi length does not match F")
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "c", float(self.c))

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return 0.5 * float(x @ self.F @ x) + float(x @ self.xi) + self.c

    def sup(self, rel_tol: float = DEFAULT_PINV_REL_TOL) -> tuple[float, np.ndarray]:
        value, argmax = maxplus_sup_quad(self.F, self.xi, rel_tol=rel_tol)
        return value + self.c, argmax


def maxplus_sup_quad(
    F,
    xi,
    rel_tol: float = DEFAULT_PINV_REL_TOL,
    range_tol: float = 1e-8,
) -> tuple[float, np.ndarray]:
    """Max-plus integral ``sup_x 1/2 <x,Fx> + <x,xi>``.

    Finite iff ``F <= 0`` and ``xi`` lies in ``range(F)``; then the value is
    ``-1/2 <xi, F^+ xi>`` attained at ``-F^+ xi``. Raises :class:`Unbounded`
    otherwise.
    """
    xi = np.asarray(xi, dtype=float).reshape(-1)
    lam, V = sym_eig(F)
    cut = _cutoff(lam, rel_tol)
    if lam[0] > cut:
        raise Unbounded(f"quadratic has positive curvature: max eigenvalue {lam[0]:.3e} > {cut:.1e}")
    nonzero = np.abs(lam) > cut
    coeffs = V.T @ xi
    xi_norm = float(np.linalg.norm(xi))
    ker_part = float(np.linalg.norm(coeffs[~nonzero]))
    if ker_part > range_tol * xi_norm:
        raise Unbounded(f"linear term has a kernel component of norm {ker_part:.3e}")
    inv = np.zeros_like(lam)
    inv[nonzero] = 1.0 / lam[nonzero]
    argmax = -V @ (inv * coeffs)
    value = -0.5 * float(coeffs @ (inv * coeffs))
    return value, argmax
