"""Certified special points on linear subvarieties of A^n = Y(1)^n."""

from .bounds import BoundReport, discriminant_cap, lemma_c1, lemma_c2, theorem_constants
from .exact_linear import Empty, ExactMatrix, LinearSubvariety, contains_direction, contains_point, intersect
from .heights import HeightValue, affine_height, liouville_gap, reduce_to_hyperplane, subspace_height
from .modular_eval import ClassPolynomial, SingularModulus, class_polynomial, j_eval, singular_modulus
from .quadratic import ReducedForm, class_number, classify_discriminant, reduced_forms
from .search import SolveReport, certify_zero, enumerate_singular_moduli, solve, verify_lemma31
from .special_geometry import EqualityPattern, diagonal_specials_in, in_positive_dim_special, project_by_pattern

__version__ = "0.1.0"

__all__ = [
    "BoundReport", "ClassPolynomial", "Empty", "EqualityPattern", "ExactMatrix", "HeightValue",
    "LinearSubvariety", "ReducedForm", "SingularModulus", "SolveReport", "affine_height",
    "certify_zero", "class_number", "class_polynomial", "classify_discriminant", "contains_direction",
    "contains_point", "diagonal_specials_in", "discriminant_cap", "enumerate_singular_moduli",
    "in_positive_dim_special", "intersect", "j_eval", "lemma_c1", "lemma_c2", "liouville_gap",
    "project_by_pattern", "reduce_to_hyperplane", "reduced_forms", "singular_modulus", "solve",
    "subspace_height", "theorem_constants", "verify_lemma31",
]
