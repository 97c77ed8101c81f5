"""Numerical Hartogs extension on a periodic spectral grid.

Modules
-------
grid       periodic grids, fields, (0,q)-forms, spectral ∂̄ and its adjoint
geometry   subspaces, obstacles, domains, cutoff and hypothesis checks
hardy      Hardy inequality and subharmonic-witness verification
solver     least-norm ∂̄ solver and estimate certification
extension  cutoff-and-correct extension pipeline
io, config, cli   field dumps, experiment files, command-line front end
"""

__version__ = "0.1.0"

from .errors import HypothesisError, PreconditionError, VerificationError
from .extension import InputFunction, build_rhs, extend, farfield_vanishing_check, holomorphy_check
from .geometry import (AffineSubspace, CutoffProfile, DomainSpec, ExtensionConfig, ObstacleSet,
                       check_hypotheses)
from .grid import FormField, GridSpec, ScalarField, dbar, dbar_adjoint, norm_l2
from .hardy import TestFunctionFamily, hardy_constant, rayleigh_quotient, verify_hardy
from .solver import apriori_inequality_check, certify_estimates, solve_minimal

__all__ = [
    "AffineSubspace", "CutoffProfile", "DomainSpec", "ExtensionConfig", "FormField", "GridSpec",
    "HypothesisError", "InputFunction", "ObstacleSet", "PreconditionError", "ScalarField",
    "TestFunctionFamily", "VerificationError", "apriori_inequality_check", "build_rhs",
    "certify_estimates", "check_hypotheses", "dbar", "dbar_adjoint", "extend",
    "farfield_vanishing_check", "hardy_constant", "holomorphy_check", "norm_l2",
    "rayleigh_quotient", "solve_minimal", "verify_hardy",
]
