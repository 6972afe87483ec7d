"""Weil heights of rational points and of linear subvarieties.

Over Q the product over finite places of ``max |x_i|_p`` is the inverse of
the content of the vector, so every height reduces to a norm of the
primitive integer representative.  Heights therefore come with an exact
square (a rational), which makes comparisons decisive even when two
heights coincide; the arb balls are what downstream bound formulas use.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Sequence

from flint import arb, fmpz

from .balls import DEFAULT_PREC, arb_from_fraction, workprec
from .exact_linear import (
    ExactMatrix,
    LinearSubvariety,
    as_fraction,
    kernel,
    minors,
    primitive_integer_vector,
    rank,
)


@dataclass(frozen=True)
class HeightValue:
    value: arb
    log_value: arb
    square: Fraction  # exact value of height**2

    @classmethod
    def from_square(cls, square, prec: int = DEFAULT_PREC) -> "HeightValue":
        square = Fraction(square)
        with workprec(prec):
            s = arb_from_fraction(square)
            value = s.sqrt()
            log_value = s.log() / 2
        return cls(value, log_value, square)

    def is_integer(self) -> bool:
        return self.square.denominator == 1 and isqrt(self.square.numerator) ** 2 == self.square.numerator

    def __le__(self, other: "HeightValue") -> bool:
        return self.square <= other.square

    def __lt__(self, other: "HeightValue") -> bool:
        return self.square < other.square

    def scaled_square_le(self, other: "HeightValue", factor) -> bool:
        """Exact test ``self <= factor * other`` for a rational factor >= 0."""
        return self.square <= Fraction(factor) ** 2 * other.square

    def __str__(self):
        return f"H = {self.value.str(25, radius=True)}  (log H = {self.log_value.str(25, radius=True)})"


def _require_nonzero(coords):
    coords = [as_fraction(x) for x in coords]
    if not coords or all(x == 0 for x in coords):
        raise ValueError("height of the zero vector is undefined")
    return coords


def projective_height_sup(coords: Sequence, prec: int = DEFAULT_PREC) -> HeightValue:
    """H^(inf) of a projective point (max norm of the primitive integer vector)."""
    v = primitive_integer_vector(_require_nonzero(coords))
    m = max(abs(x) for x in v)
    return HeightValue.from_square(m * m, prec)


def projective_height_l2(coords: Sequence, prec: int = DEFAULT_PREC) -> HeightValue:
    """H^(2) of a projective point (Euclidean norm of the primitive integer vector)."""
    v = primitive_integer_vector(_require_nonzero(coords))
    return HeightValue.from_square(sum(x * x for x in v), prec)


def affine_height(p: Sequence, prec: int = DEFAULT_PREC) -> HeightValue:
    return projective_height_sup([1, *p], prec)


def rational_height(x) -> int:
    """H(x) = max(|num|, den) for a rational number."""
    x = as_fraction(x)
    return max(abs(x.numerator), x.denominator)


def weighted_l2_height(coords: Sequence, weights: Sequence, prec: int = DEFAULT_PREC) -> HeightValue:
    """Finite part times (sum_I w_I |x_I|^2)^(1/2) for a rational vector x."""
    v = primitive_integer_vector(_require_nonzero(coords))
    return HeightValue.from_square(sum(Fraction(w) * x * x for w, x in zip(weights, v)), prec)


def grassmann_coordinates(L: LinearSubvariety) -> dict:
    b = L.homogenized_basis()
    return minors(b, b.cols)


def subspace_height(L: LinearSubvariety, prec: int = DEFAULT_PREC) -> HeightValue:
    """H(L) via the Grassmann coordinates of the homogenized subspace."""
    if not isinstance(L, LinearSubvariety):
        raise ValueError("height of an empty subvariety is undefined")
    return projective_height_l2(list(grassmann_coordinates(L).values()), prec)


def reduce_to_hyperplane(L: LinearSubvariety) -> tuple[tuple[Fraction, ...], Fraction]:
    """An equation ``a . z + b = 0`` vanishing on L whose height is at most H(L).

    The homogenized basis is completed by standard basis vectors (taken in
    index order) to a hyperplane of Q^(n+1), and the annihilating functional
    of that hyperplane is returned as a primitive integer vector whose first
    nonzero entry is positive.
    """
    if not isinstance(L, LinearSubvariety):
        raise ValueError("empty subvariety")
    n = L.ambient_dim
    if L.is_full():
        raise ValueError("the full affine space is not contained in a hyperplane")
    cols = L.homogenized_basis().columns()
    target = n  # dimension of a hyperplane in Q^(n+1)
    for i in range(n + 1):
        if len(cols) == target:
            break
        e = tuple(Fraction(int(k == i)) for k in range(n + 1))
        trial = cols + [e]
        if rank(ExactMatrix.from_columns(trial, n + 1)) == len(trial):
            cols = trial
    functional = kernel(ExactMatrix.from_columns(cols, n + 1).T)
    assert functional.cols == 1
    v = primitive_integer_vector(functional.column(0))
    lead = next(x for x in v if x != 0)
    if lead < 0:
        v = tuple(-x for x in v)
    a = tuple(Fraction(x) for x in v[:-1])
    if all(x == 0 for x in a):
        raise AssertionError("hyperplane at infinity cannot contain a nonempty affine L")
    return a, Fraction(v[-1])


def liouville_gap(height_bound, degree_bound: int, prec: int = DEFAULT_PREC) -> arb:
    """Certified lower bound for |alpha| over nonzero alpha of bounded height/degree.

    ``height_bound`` may be a HeightValue, an arb ball or an exact number;
    the upper end of a ball is used.  Returns a point ball equal to (a lower
    bound of) ``H^(-D)``.
    """
    if degree_bound < 1:
        raise ValueError("degree bound must be >= 1")
    with workprec(prec):
        if isinstance(height_bound, HeightValue):
            log_h = height_bound.log_value
        elif isinstance(height_bound, arb):
            log_h = height_bound.upper().log()
        else:
            log_h = arb_from_fraction(Fraction(height_bound)).log()
        if log_h.upper() < 0:
            raise ValueError("height bound must be >= 1")
        log_h = log_h.upper()
        if log_h.is_zero():
            return arb(1)
        eps = (-(log_h * degree_bound)).exp()
        return eps.lower()


def log_liouville_gap(log_height_bound: arb, degree_bound: int) -> arb:
    """log of the gap, as a point ball at its lower end (avoids underflow)."""
    return (-(log_height_bound.upper() * fmpz(degree_bound))).lower()
