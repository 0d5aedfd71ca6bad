"""Exact symbolic toolkit for graded phase spaces, Courant algebroids and
constrained Hamiltonian mechanics, over rational-coefficient polynomials."""

__version__ = "0.1.0"

from .basecoeff import BaseCoeff
from .graded_algebra import Derivation, GradedPoly, Registry
from .graded_poisson import PhaseSpace, hamiltonian_derivation, jacobiator, poisson_bracket
from .courant import (
    CourantData,
    action_algebroid,
    build_theta,
    dorfman_bracket,
    e_differential,
    section_components,
    section_function,
    standard_courant,
    theta_square,
    verify_courant_axioms,
)
from .report import CheckRecord, Report
