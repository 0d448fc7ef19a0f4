"""Mod-p operation rewriting, periodic cohomology rings, and the
fixed-point-web certificate search, with a batch CLI.

Subpackages:
    steenrod     exact arithmetic and rewriting for Sq/P compositions
    action       polynomial-algebra action (the oracle for the rewriter)
    rings        graded algebras over Z_p and Q, validation
    builders     model-space constructors and ring-literal JSON
    periodicity  inducer search, minimal periods, classification
    web          isotropy models, the involution graph, certificates
    corpus       shipped rings/models and the seeded random generators
    verify       batch suites; cli wires everything to the command line
"""

from .backend import BACKEND
from .rings import QQ, GradedAlgebra, Zp, validate
from .steenrod import (
    OpMonomial,
    Prime,
    SteenrodElement,
    adem_reduce,
    binom_mod_p,
    hit_decompose,
    leading_coefficient_check,
    sq_power_of_two_decomposition,
)
from .web import IsotropyModel, build_gamma, find_certificate, fixed_set

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "GradedAlgebra",
    "IsotropyModel",
    "OpMonomial",
    "Prime",
    "QQ",
    "SteenrodElement",
    "Zp",
    "adem_reduce",
    "binom_mod_p",
    "build_gamma",
    "find_certificate",
    "fixed_set",
    "hit_decompose",
    "leading_coefficient_check",
    "sq_power_of_two_decomposition",
    "validate",
]
