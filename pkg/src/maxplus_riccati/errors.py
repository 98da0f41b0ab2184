"""Exception types raised across the package.

Each error maps onto a CLI exit code (see ``EXIT_CODES``).
"""

from __future__ import annotations


class RiccatiError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(RiccatiError, ValueError):
    exit_code = 2


class EigenError(RiccatiError):
    """Eigen-solver failed to converge."""


class Unbounded(RiccatiError):
    """A quadratic supremum is +inf (positive curvature or range violation)."""

    exit_code = 5


class UnboundedComposition(Unbounded):
    pass


class UnboundedReconstruction(Unbounded):
    pass


class NotAdmissible(RiccatiError, ValueError):
    """Initial condition is not in the admissible class (M_tilde - M not coercive)."""

    exit_code = 2


class CoercivityLost(RiccatiError):
    """P(t) - M stopped being coercive."""

    exit_code = 4

    def __init__(self, t: float, margin: float, trajectory=None):
        super().__init__(f"coercivity of P(t) - M lost at t={t:.6g} (margin {margin:.3e})")
        self.t = t
        self.margin = margin
        self.trajectory = trajectory


class FiniteEscape(RiccatiError):
    """The Riccati solution norm exceeded the escape ceiling."""

    exit_code = 3

    def __init__(self, report, trajectory=None):
        super().__init__(
            f"finite escape: |P|_F exceeded ceiling by t={report.t_escape_lower:.9g}"
        )
        self.report = report
        self.trajectory = trajectory


EXIT_CODES = {
    "ok": 0,
    "check_failure": 1,
    "config": 2,
    "finite_escape": 3,
    "coercivity_lost": 4,
    "unbounded": 5,
}
