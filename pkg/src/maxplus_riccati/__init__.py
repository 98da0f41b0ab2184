"""Max-plus dual-space fundamental solution semigroup for discretized operator
differential Riccati equations."""

from .errors import (CoercivityLost, ConfigError, FiniteEscape, NotAdmissible, RiccatiError,
                     Unbounded, UnboundedComposition, UnboundedReconstruction)
from .linalg import QuadForm, coercivity_margin, maxplus_sup_quad, pseudo_inverse, sym_eig
from .problem import Grid, ProblemSpec, transport_problem
from .recipe import Recipe
from .riccati import SeedTrajectory, integrate_direct, integrate_seed
from .semigroup import (DualQuad, KernelTriple, compose, dual_of_terminal, iterate_doubling,
                        iterate_linear, reconstruct, seed_kernel)

__all__ = [
    "CoercivityLost", "ConfigError", "FiniteEscape", "NotAdmissible", "RiccatiError",
    "Unbounded", "UnboundedComposition", "UnboundedReconstruction",
    "QuadForm", "coercivity_margin", "maxplus_sup_quad", "pseudo_inverse", "sym_eig",
    "Grid", "ProblemSpec", "transport_problem", "Recipe",
    "SeedTrajectory", "integrate_direct", "integrate_seed",
    "DualQuad", "KernelTriple", "compose", "dual_of_terminal", "iterate_doubling",
    "iterate_linear", "reconstruct", "seed_kernel",
]
