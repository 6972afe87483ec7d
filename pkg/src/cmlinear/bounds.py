"""Explicit discriminant bounds for special points on linear subvarieties.

Constants with integer inputs are carried as exact Fractions (1.4e11 and
2.1e4 are exact decimals); only the log-height factor is a ball.  The
discriminant cap is the ceiling of the upper end of the squared bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from flint import arb

from .balls import arb_from_fraction, ceil_upper, workprec
from .exact_linear import LinearSubvariety
from .heights import HeightValue, subspace_height

THEOREM_C2_BASE = Fraction(14 * 10**10)   # 1.4e11
LEMMA_C1_BASE = Fraction(13 * 10**10)     # 1.3e11
GROWTH = Fraction(21000)                  # 2.1e4


def _check_positive(**kwargs):
    for name, value in kwargs.items():
        if int(value) != value or value < 1:
            raise ValueError(f"{name} must be a positive integer, got {value!r}")


def theorem_c1(n: int, degree: int = 1) -> int:
    _check_positive(n=n, degree=degree)
    return 480 * n * n * 64**n * degree**3


def theorem_c2(n: int, degree: int = 1) -> Fraction:
    _check_positive(n=n, degree=degree)
    return THEOREM_C2_BASE * GROWTH**n * (n + 1) ** (4 * n + 6) * degree**4


def theorem_constants(n: int, degree: int = 1) -> tuple[int, Fraction]:
    """(c1, c2) exactly: c1 = 480 n^2 64^n deg^3, c2 = 1.4e11 (2.1e4)^n (n+1)^(4n+6) deg^4."""
    return theorem_c1(n, degree), theorem_c2(n, degree)


def _prec_for(*values) -> int:
    bits = max((abs(Fraction(v)).numerator.bit_length() for v in values), default=0)
    return 2 * bits + 128


@dataclass(frozen=True)
class BoundReport:
    n: int
    degree: int
    height: HeightValue
    c1: int
    c2: Fraction
    sqrt_cap: arb
    discriminant_cap: int

    @property
    def log_height(self) -> arb:
        return self.height.log_value


def discriminant_cap(L: LinearSubvariety, degree: int = 1) -> BoundReport:
    """max |Delta_i|^(1/2) <= c1 log H(L) + c2 for special P outside Z^sp; cap = ceil(bound^2)."""
    if not isinstance(L, LinearSubvariety):
        raise ValueError("the subvariety is empty")
    if L.is_full():
        raise ValueError("L must be a proper subvariety of A^n")
    n = L.ambient_dim
    c1, c2 = theorem_constants(n, degree)
    h = subspace_height(L)
    prec = _prec_for(c1, c2)
    with workprec(prec):
        log_h = subspace_height(L, prec).log_value
        sqrt_cap = c1 * log_h + arb_from_fraction(c2)
        cap = ceil_upper((sqrt_cap * sqrt_cap).upper())
    return BoundReport(n, degree, h, c1, c2, sqrt_cap, max(cap, 3))


# ---------------------------------------------------------------------------
# constants for linear equations in distinct singular moduli


@dataclass(frozen=True)
class LinearEquationConstant:
    general: arb      # 480 k^2 64^k deg^3 log H + 1.3e11 (2.1e4)^k (k+1)^(4k+6) deg^4
    same_field: arb   # 18 k^2 8^k deg0^3 log H0 + log+ house(b) + 21 k^3 8^k deg0^3


def lemma_c1(k: int, log_H0, log_house_b, degree0: int = 1, degree: int = 1,
             log_H=None) -> LinearEquationConstant:
    """Admissible c1(a, b) for sum a_i j(tau_i) + b = 0 in k distinct singular moduli.

    ``log_H`` is the log-height of (a_1, ..., a_k, b); it defaults to
    ``log_H0``.  ``log_house_b`` is log max(1, |b|).
    """
    _check_positive(k=k, degree0=degree0, degree=degree)
    gen_coeff = 480 * k * k * 64**k * degree**3
    gen_const = LEMMA_C1_BASE * GROWTH**k * (k + 1) ** (4 * k + 6) * degree**4
    with workprec(_prec_for(gen_const)):
        log_H0 = _as_arb(log_H0)
        log_house_b = _as_arb(log_house_b)
        log_H = log_H0 if log_H is None else _as_arb(log_H)
        general = gen_coeff * log_H + arb_from_fraction(gen_const)
        same = (18 * k * k * 8**k * degree0**3) * log_H0 + log_house_b + 21 * k**3 * 8**k * degree0**3
    return LinearEquationConstant(general, same)


def lemma_c2(k: int, log_H0, degree0: int = 1) -> arb:
    """144 k^2 64^k deg0^3 log H0 + 218 k^3 64^k deg0^3 (single CM field case)."""
    _check_positive(k=k, degree0=degree0)
    with workprec(128):
        return (144 * k * k * 64**k * degree0**3) * _as_arb(log_H0) + 218 * k**3 * 64**k * degree0**3


def _as_arb(x) -> arb:
    if isinstance(x, arb):
        return x
    if isinstance(x, HeightValue):
        return x.log_value
    if isinstance(x, float):
        return arb(x)
    return arb_from_fraction(Fraction(x))


# Read-only intermediate forms of c1 from the successive reduction steps.
# They are exposed for audit output and are not used by the solver.

def same_discriminant_bound(k: int, log_H0, log_house_b, degree0: int = 1) -> arb:
    """2 deg0 log H0 + log+ house(b) + log(70 k)."""
    with workprec(128):
        return 2 * degree0 * _as_arb(log_H0) + _as_arb(log_house_b) + arb(70 * k).log()


def separated_conductor_bound(k: int, log_H0, log_house_b, degree0: int = 1) -> arb:
    """2 deg0 log H0 + log+ house(b) + log(8400 k)."""
    with workprec(128):
        return 2 * degree0 * _as_arb(log_H0) + _as_arb(log_house_b) + arb(8400 * k).log()


def automorphism_count_bound(k: int, log_H0, degree0: int = 1) -> arb:
    """4 deg0 log H0 + 2 deg0 log 2 + log(140 k)."""
    with workprec(128):
        return 4 * degree0 * _as_arb(log_H0) + 2 * degree0 * arb(2).log() + arb(140 * k).log()


def close_conductor_bound(k: int, log_H0, degree0: int = 1) -> arb:
    """138 k^2 deg0^3 log H0 + 69 k^2 log(2k) deg0^2."""
    with workprec(128):
        return 138 * k * k * degree0**3 * _as_arb(log_H0) + 69 * k * k * arb(2 * k).log() * degree0**2


def step_majorant(k: int, log_H0, log_house_b, degree0: int = 1) -> arb:
    """Common majorant 138 k^2 deg0^3 log H0 + log+ house(b) + 69 k^2 log(2k) deg0^2."""
    with workprec(128):
        return close_conductor_bound(k, log_H0, degree0) + _as_arb(log_house_b)


def log_plus(x) -> arb:
    """log max(1, |x|) for a rational x."""
    x = abs(Fraction(x))
    with workprec(128):
        return arb(0) if x <= 1 else arb_from_fraction(x).log()


def format_decimal(x: Fraction) -> str:
    """Exact decimal for c2-type constants (terminating decimals only)."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    num, den = x.numerator, x.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{x.numerator}/{x.denominator}"
    scale = max(twos, fives)
    digits = str(abs(num) * 10**scale // x.denominator)
    digits = digits.rjust(scale + 1, "0")
    sign = "-" if num < 0 else ""
    return f"{sign}{digits[:-scale]}.{digits[-scale:]}"


def scientific(x: Fraction, digits: int = 6) -> str:
    x = Fraction(x)
    if x == 0:
        return "0"
    e = math.floor(math.log10(abs(x.numerator)) - math.log10(x.denominator))
    mant = x / Fraction(10) ** e
    if abs(mant) >= 10:
        mant /= 10
        e += 1
    return f"{float(mant):.{digits}g}e{e}"
