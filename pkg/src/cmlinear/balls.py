"""Small helpers around python-flint's arb/acb balls.

flint keeps its working precision in a process-global context, so every
routine that needs a specific precision goes through :func:`workprec`.
Ball computations are kept on the calling thread; worker threads in the
solver only touch floats.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from fractions import Fraction

import flint
from flint import acb, arb, fmpq, fmpz

DEFAULT_PREC = 128


class PrecisionError(ArithmeticError):
    """A certified decision could not be made at the current precision."""


@contextmanager
def workprec(bits: int):
    old = flint.ctx.prec
    flint.ctx.prec = max(int(bits), 32)
    try:
        yield
    finally:
        flint.ctx.prec = old


def arb_from_fraction(x) -> arb:
    x = Fraction(x)
    if x.denominator == 1:
        return arb(fmpz(x.numerator))
    return arb(fmpq(x.numerator, x.denominator))


def exact_of(x: arb) -> Fraction:
    """Exact dyadic value of a point ball (e.g. the output of ``arb.upper``)."""
    man, exp = x.mid().man_exp()
    man, exp = int(man), int(exp)
    if exp >= 0:
        return Fraction(man * (1 << exp))
    return Fraction(man, 1 << -exp)


def upper_fraction(x: arb) -> Fraction:
    return exact_of(x.upper())


def lower_fraction(x: arb) -> Fraction:
    return exact_of(x.lower())


def ceil_upper(x: arb) -> int:
    """Smallest integer certainly >= every point of ``x``."""
    return math.ceil(upper_fraction(x))


def complex_radius(z: acb) -> Fraction:
    """Upper bound for the distance from the midpoint to any point of ``z``."""
    return upper_fraction(z.real.rad()) + upper_fraction(z.imag.rad())


def abs_upper(z) -> Fraction:
    if isinstance(z, acb):
        return upper_fraction(abs(z).upper())
    return upper_fraction(abs(z).upper())


def excludes_zero(z) -> bool:
    if isinstance(z, acb):
        return not z.real.contains(0) or not z.imag.contains(0)
    return not z.contains(0)


def ball_str(x: arb, digits: int = 30) -> str:
    """Decimal string ``mid +/- rad`` with the radius rounded outward."""
    return x.str(digits, radius=True)


def cball_str(z: acb, digits: int = 30) -> str:
    re = ball_str(z.real, digits)
    im = ball_str(z.imag, digits)
    return f"{re} + {im}*I"


def to_complex(z: acb) -> complex:
    return complex(float(z.real.mid()), float(z.imag.mid()))


def log2_upper(x: arb) -> float:
    """Rough (non-certified) size estimate used only to pick precisions."""
    u = abs(x).upper()
    if u.is_zero():
        return -math.inf
    return float(u.log()) / math.log(2)
