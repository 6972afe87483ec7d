"""Certified evaluation of Klein's j-invariant and Hilbert class polynomials.

j is summed from its q-expansion with exact integer coefficients.  The
truncation error after the q^K term is bounded with c_k < exp(4 pi sqrt k)
(checked against the computed coefficients in the test-suite): for
|q| <= exp(-pi sqrt 3) the ratio of consecutive majorant terms is below 1,
so the tail is dominated by a geometric series.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import flint
from flint import acb, arb, fmpz, fmpz_poly, fmpz_series

from .balls import (
    PrecisionError,
    arb_from_fraction,
    ceil_upper,
    complex_radius,
    exact_of,
    workprec,
)
from .quadratic import Discriminant, ReducedForm, class_number, classify_discriminant, reduced_forms

MAX_PREC = 2**16 + 256
DEFAULT_RADIUS = Fraction(1, 10**20)
CACHE_ENV = "CMLINEAR_CACHE_DIR"
CACHE_FORMAT = 1

# ---------------------------------------------------------------------------
# q-expansion coefficients


_coeff_cache: list[int] = []


def _compute_j_coefficients(count: int) -> list[int]:
    """c_0 .. c_{count-1} of j - 1/q, exactly."""
    n = count + 2
    old_cap = flint.ctx.cap
    flint.ctx.cap = n
    try:
        sigma3 = [0] * n
        for d in range(1, n):
            for m in range(d, n, d):
                sigma3[m] += d**3
        e4 = fmpz_series([1] + [240 * s for s in sigma3[1:]])
        # prod (1 - q^k)^3 = sum (-1)^k (2k+1) q^(k(k+1)/2)  (Jacobi)
        eta3 = [0] * n
        k = 0
        while k * (k + 1) // 2 < n:
            eta3[k * (k + 1) // 2] = (-1) ** k * (2 * k + 1)
            k += 1
        eta3 = fmpz_series(eta3)
        eta24 = eta3**8  # Delta / q
        jq = e4**3 / eta24  # q * j
        coeffs = jq.coeffs()
    finally:
        flint.ctx.cap = old_cap
    coeffs = [int(c) for c in coeffs] + [0] * n
    assert coeffs[0] == 1
    return coeffs[1:count + 1]


def j_coefficients(count: int) -> list[int]:
    """Exact coefficients c_0, c_1, ... of j(q) = 1/q + sum c_k q^k."""
    global _coeff_cache
    if len(_coeff_cache) < count:
        size = max(count, 2 * len(_coeff_cache), 64)
        _coeff_cache = _compute_j_coefficients(size)
    return _coeff_cache[:count]


def coefficient_majorant(k: int) -> arb:
    return (4 * arb.pi() * arb(k).sqrt()).exp()


def tail_bound(K: int, q_abs: arb) -> arb:
    """Upper bound for sum_{k > K} c_k |q|^k, or +inf if no domination."""
    m = K + 1
    ratio = (4 * arb.pi() * (arb(m + 1).sqrt() - arb(m).sqrt())).exp() * q_abs
    if not ratio < 1:
        return arb.pos_inf()
    first = coefficient_majorant(m) * q_abs**m
    return (first / (1 - ratio)).upper()


def _log2(x: Fraction) -> float:
    return math.log2(x.numerator) - math.log2(x.denominator)


Q_ABS_MAX = math.exp(-math.pi * math.sqrt(3))  # |q| on the fundamental domain


# ---------------------------------------------------------------------------
# fundamental domain


Matrix2 = tuple[tuple[int, int], tuple[int, int]]


def _mat_mul(x: Matrix2, y: Matrix2) -> Matrix2:
    (a, b), (c, d) = x
    (e, f), (g, h) = y
    return ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))


def mobius(gamma: Matrix2, tau: acb) -> acb:
    (a, b), (c, d) = gamma
    return (a * tau + b) / (c * tau + d)


def in_fundamental_domain(tau: acb) -> bool:
    """Certified membership in the half-open fundamental domain.

    Raises PrecisionError when the ball meets the boundary but is not
    exactly on it.
    """
    x, y = tau.real, tau.imag
    if not y > 0:
        raise PrecisionError("ball meets the real axis")
    half = arb(0.5)
    left_ok, right_ok = x >= -half, x < half
    if not (left_ok and right_ok):
        if (x < -half) or (x >= half):
            return False
        raise PrecisionError("real part straddles +-1/2")
    n = x * x + y * y
    if n > 1:
        return True
    if n < 1:
        return False
    if (n - 1).is_zero():
        if x <= 0:
            return True
        if x > 0:
            return False
    raise PrecisionError("|tau| straddles the unit circle")


def reduce_to_fundamental(tau: acb, max_steps: int = 10_000) -> tuple[acb, Matrix2]:
    """Return (gamma tau, gamma) with gamma in SL2(Z) and gamma tau in F.

    The transformation is found on the exact (dyadic) midpoint and then
    applied to the whole ball, whose membership in F is certified.
    """
    x = exact_of(tau.real.mid())
    y = exact_of(tau.imag.mid())
    if y <= 0 or not tau.imag > 0:
        raise ValueError("tau must lie in the upper half plane")
    gamma: Matrix2 = ((1, 0), (0, 1))
    T = lambda n: ((1, n), (0, 1))  # noqa: E731
    S: Matrix2 = ((0, -1), (1, 0))
    for _ in range(max_steps):
        n = math.floor(x + Fraction(1, 2))
        if n:
            x -= n
            gamma = _mat_mul(T(-n), gamma)
        norm = x * x + y * y
        if norm < 1 or (norm == 1 and x > 0):
            x, y = -x / norm, y / norm
            gamma = _mat_mul(S, gamma)
            continue
        break
    else:
        raise PrecisionError("reduction did not terminate")
    if x == Fraction(1, 2):
        gamma = _mat_mul(T(-1), gamma)
    reduced = mobius(gamma, tau)
    if not in_fundamental_domain(reduced):
        raise PrecisionError("reduced ball is not certifiably inside F")
    return reduced, gamma


# ---------------------------------------------------------------------------
# CM periods and singular moduli


@dataclass(frozen=True)
class CMPeriod:
    form: ReducedForm
    discriminant: Discriminant

    def __post_init__(self):
        if self.form.discriminant != self.discriminant.value:
            raise ValueError("form and discriminant disagree")
        if not self.form.is_reduced():
            raise ValueError(f"{self.form} is not reduced")

    @classmethod
    def of_form(cls, form) -> "CMPeriod":
        form = ReducedForm(*form)
        return cls(form, classify_discriminant(form.discriminant))

    def tau_ball(self, prec: int = 128) -> acb:
        a, b, _ = self.form
        with workprec(prec):
            return acb(arb(-b), arb(-self.discriminant.value).sqrt()) / (2 * a)

    @property
    def tau(self) -> acb:
        return self.tau_ball()

    @property
    def imag_exact_square(self) -> Fraction:
        """(Im tau)^2 = |Delta| / (4 a^2), exactly."""
        return Fraction(-self.discriminant.value, 4 * self.form.a ** 2)

    @property
    def key(self) -> tuple[int, int, int, int]:
        return (self.discriminant.value, *self.form)


def tau_delta(delta) -> CMPeriod:
    d = delta if isinstance(delta, Discriminant) else classify_discriminant(delta)
    b = d.value % 2
    return CMPeriod(ReducedForm(1, b, (b * b - d.value) // 4), d)


@dataclass(frozen=True, eq=False)
class SingularModulus:
    """j(tau) for a reduced CM-period, as a certified complex ball.

    Equality and hashing use the (Delta, a, b, c) identity only: distinct
    reduced forms give distinct singular moduli.
    """

    period: CMPeriod
    value: acb = field(repr=False)
    precision_bits: int
    radius: Fraction = field(repr=False)

    @property
    def key(self):
        return self.period.key

    @property
    def discriminant(self) -> int:
        return self.period.discriminant.value

    @property
    def form(self) -> ReducedForm:
        return self.period.form

    def __eq__(self, other):
        return isinstance(other, SingularModulus) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def is_real(self) -> bool:
        return self.form.is_ambiguous()

    def to_complex(self) -> complex:
        return complex(float(self.value.real.mid()), float(self.value.imag.mid()))

    def __str__(self):
        return f"j[{self.discriminant}; {self.form}]"


def _j_series(tau: acb, target_radius: Fraction) -> acb | None:
    """One attempt at the current precision; None if the tail cannot be made small."""
    q = (2 * tau).exp_pi_i()
    q_abs = abs(q).upper()
    target = arb_from_fraction(target_radius) / 4
    K = 1
    while True:
        tb = tail_bound(K, q_abs)
        if tb.is_finite() and tb < target:
            break
        K += 1
        if K > 200_000:
            return None
    coeffs = j_coefficients(K + 1)
    s = acb(0)
    for c in reversed(coeffs):
        s = s * q + int(c)
    err = arb(0, tb)
    return 1 / q + s + acb(err, err)


def j_eval_tau(tau: acb | complex, target_radius=DEFAULT_RADIUS, *, reduce: bool = True) -> acb:
    """Certified j(tau) for a point of the upper half plane."""
    target_radius = Fraction(target_radius)
    if target_radius <= 0:
        raise ValueError("target radius must be positive")
    if not isinstance(tau, acb):
        tau = acb(tau)
    if reduce:
        _, gamma = reduce_to_fundamental(tau)
    elif not in_fundamental_domain(tau):
        raise ValueError("tau is not in the fundamental domain")
    else:
        gamma = ((1, 0), (0, 1))
    size = max(0.0, 2 * math.pi * float(mobius(gamma, tau).imag.mid()) / math.log(2))
    prec = int(-_log2(target_radius) + size + 40)
    while prec <= MAX_PREC:
        with workprec(prec):
            reduced = mobius(gamma, tau)
            if not in_fundamental_domain(reduced):
                raise PrecisionError("reduced ball left F")
            val = _j_series(reduced, target_radius)
        if val is not None and complex_radius(val) <= target_radius:
            return val
        prec *= 2
    raise PrecisionError(f"target radius {float(target_radius):.3g} unreachable below {MAX_PREC} bits")


def j_eval(period: CMPeriod, target_radius=DEFAULT_RADIUS) -> SingularModulus:
    """Certified singular modulus j(tau) for a reduced CM-period."""
    target_radius = Fraction(target_radius)
    if target_radius <= 0:
        raise ValueError("target radius must be positive")
    size = math.pi * math.sqrt(-period.discriminant.value) / period.form.a / math.log(2)
    prec = int(-_log2(target_radius) + size + 40)
    assert arb_from_fraction(period.imag_exact_square) >= arb(3) / 4
    while prec <= MAX_PREC:
        with workprec(prec):
            val = _j_series(period.tau_ball(prec), target_radius)
        if val is not None:
            rad = complex_radius(val)
            if rad <= target_radius:
                return SingularModulus(period, val, prec, rad)
        prec *= 2
    raise PrecisionError(f"target radius {float(target_radius):.3g} unreachable below {MAX_PREC} bits")


@lru_cache(maxsize=None)
def _singular_modulus_cached(key, target_radius: Fraction) -> SingularModulus:
    delta, a, b, c = key
    return j_eval(CMPeriod(ReducedForm(a, b, c), classify_discriminant(delta)), target_radius)


def singular_modulus(delta: int, form=None, target_radius=DEFAULT_RADIUS) -> SingularModulus:
    """Cached j-value of the given reduced form (default: tau_Delta's form)."""
    period = tau_delta(delta) if form is None else CMPeriod.of_form(form)
    if period.discriminant.value != delta:
        raise ValueError(f"form {period.form} has discriminant {period.discriminant.value}, not {delta}")
    return _singular_modulus_cached(period.key, Fraction(target_radius))


def singular_moduli_of(delta) -> list[SingularModulus]:
    d = delta if isinstance(delta, Discriminant) else classify_discriminant(delta)
    return [singular_modulus(d.value, f) for f in reduced_forms(d)]


def archimedean_deviation(tau: acb, j_value: acb) -> arb:
    """| |j(tau)| - exp(2 pi Im tau) | as a ball."""
    return abs(abs(j_value) - (2 * arb.pi() * tau.imag).exp())


def j_house_bound(delta, prec: int = 128) -> arb:
    """11 exp(pi sqrt|Delta|): bounds every conjugate of j and its height."""
    d = delta if isinstance(delta, Discriminant) else classify_discriminant(delta)
    with workprec(prec):
        return (11 * (arb.pi() * arb(-d.value).sqrt()).exp()).upper()


def j_height_bound(delta, prec: int = 128) -> arb:
    return j_house_bound(delta, prec)


def log_j_height_bound(delta, prec: int = 128) -> arb:
    d = delta if isinstance(delta, Discriminant) else classify_discriminant(delta)
    with workprec(prec):
        return (arb(11).log() + arb.pi() * arb(-d.value).sqrt()).upper()


# ---------------------------------------------------------------------------
# class polynomials


@dataclass(frozen=True)
class ClassPolynomial:
    discriminant: Discriminant
    coefficients: tuple[int, ...]  # ascending degree, monic
    precision_bits: int = 0

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def as_fmpz_poly(self) -> fmpz_poly:
        return fmpz_poly(list(self.coefficients))

    def evaluate(self, z):
        acc = acb(0) if isinstance(z, acb) else 0
        for c in reversed(self.coefficients):
            acc = acc * z + c
        return acc

    def __str__(self):
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coefficients[k]
            if c == 0:
                continue
            mono = "" if k == 0 else ("X" if k == 1 else f"X^{k}")
            if mono and abs(c) == 1:
                body = mono
            elif mono:
                body = f"{abs(c)}*{mono}"
            else:
                body = str(abs(c))
            sign = "-" if c < 0 else "+"
            terms.append((sign, body))
        if not terms:
            return "0"
        first_sign, first = terms[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out


def _size_bits(d: Discriminant, h: int) -> int:
    per_root = math.log2(11) + math.pi * math.sqrt(-d.value) / math.log(2)
    return int(math.ceil(per_root * h)) + 1


def _product_balls(d: Discriminant, extra: int) -> tuple[list[acb], int]:
    """Coefficients of prod (X - j(tau)) as balls, ascending degree."""
    forms = reduced_forms(d)
    h = len(forms)
    radius = Fraction(1, 2 ** (_size_bits(d, h) + extra))
    roots = [j_eval(CMPeriod(f, d), radius) for f in forms]
    prec = max(128, math.ceil(math.pi * math.sqrt(-d.value) * h / math.log(2)) + 64) + extra
    with workprec(prec):
        poly = [acb(1)]
        for r in roots:
            nxt = [acb(0)] * (len(poly) + 1)
            for i, c in enumerate(poly):
                nxt[i + 1] += c
                nxt[i] -= c * r.value
            poly = nxt
    return poly, prec


def _round_certified(c: acb, prec: int) -> int | None:
    """The unique integer in a coefficient ball, or None if the ball is too wide."""
    re, im = c.real, c.imag
    if not (im.contains(0) and re.rad() < arb(0.5)):
        return None
    with workprec(prec):  # endpoints must not be rounded below the ball's own precision
        lo, hi = math.ceil(exact_of(re.lower())), math.floor(exact_of(re.upper()))
    if hi < lo:
        raise ArithmeticError(f"coefficient ball {re} contains no integer")
    return lo if hi == lo else None


def class_polynomial_balls(delta) -> tuple[list[acb], list[int]]:
    """Certified coefficient balls and the integers they round to."""
    d = delta if isinstance(delta, Discriminant) else classify_discriminant(delta)
    extra = 64
    while _size_bits(d, class_number(d)) + extra <= MAX_PREC:
        balls, prec = _product_balls(d, extra)
        ints = [_round_certified(c, prec) for c in balls]
        if all(i is not None for i in ints):
            return balls, ints
        extra *= 2
    raise PrecisionError(f"class polynomial of {d.value} not certified below {MAX_PREC} bits")


def _compute_class_polynomial(d: Discriminant) -> ClassPolynomial:
    extra = 64
    while _size_bits(d, class_number(d)) + extra <= MAX_PREC:
        balls, prec = _product_balls(d, extra)
        coeffs = [_round_certified(c, prec) for c in balls]
        if all(c is not None for c in coeffs):
            if coeffs[-1] != 1:
                raise ArithmeticError("class polynomial is not monic")
            return ClassPolynomial(d, tuple(coeffs), prec)
        extra *= 2
    raise PrecisionError(f"class polynomial of {d.value} not certified below {MAX_PREC} bits")


def cache_dir(explicit: str | os.PathLike | None = None) -> Path | None:
    path = explicit or os.environ.get(CACHE_ENV)
    return Path(path) if path else None


def _record_checksum(delta: int, coeffs: list[str]) -> str:
    return hashlib.sha256(f"{delta}:{','.join(coeffs)}".encode()).hexdigest()


def _read_cached(path: Path, d: Discriminant) -> ClassPolynomial | None:
    try:
        rec = json.loads(path.read_text())
        coeffs = [str(c) for c in rec["coefficients"]]
        if (rec["format"] != CACHE_FORMAT or rec["discriminant"] != d.value
                or rec["class_number"] != len(coeffs) - 1
                or rec["class_number"] != class_number(d)
                or rec["checksum"] != _record_checksum(d.value, coeffs)
                or coeffs[-1] != "1"):
            return None
        return ClassPolynomial(d, tuple(int(c) for c in coeffs), int(rec["precision"]))
    except (OSError, ValueError, KeyError, TypeError):
        return None


def _write_cached(path: Path, poly: ClassPolynomial) -> None:
    coeffs = [str(c) for c in poly.coefficients]
    rec = {
        "format": CACHE_FORMAT,
        "discriminant": poly.discriminant.value,
        "class_number": poly.degree,
        "precision": poly.precision_bits,
        "coefficients": coeffs,
        "checksum": _record_checksum(poly.discriminant.value, coeffs),
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(rec, indent=1))
    tmp.replace(path)


_poly_memo: dict[int, ClassPolynomial] = {}


def class_polynomial(delta, cache: str | os.PathLike | None = None) -> ClassPolynomial:
    """H_Delta(X) = prod (X - j(tau)) over the reduced forms, with certified integer rounding."""
    d = delta if isinstance(delta, Discriminant) else classify_discriminant(delta)
    if d.value in _poly_memo:
        return _poly_memo[d.value]
    directory = cache_dir(cache)
    path = directory / f"classpoly_{-d.value}.json" if directory else None
    poly = _read_cached(path, d) if path and path.exists() else None
    if poly is None:
        poly = _compute_class_polynomial(d)
        if path:
            _write_cached(path, poly)
    _poly_memo[d.value] = poly
    return poly


__all__ = [
    "CMPeriod",
    "ClassPolynomial",
    "SingularModulus",
    "archimedean_deviation",
    "class_polynomial",
    "in_fundamental_domain",
    "j_coefficients",
    "j_eval",
    "j_eval_tau",
    "j_height_bound",
    "j_house_bound",
    "reduce_to_fundamental",
    "singular_modulus",
    "tau_delta",
    "tail_bound",
]
