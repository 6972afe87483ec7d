"""Imaginary quadratic discriminants, reduced forms and class-number arithmetic."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from typing import NamedTuple

from flint import arb, fmpq

from .balls import DEFAULT_PREC, workprec

FACTOR_LIMIT = 2**64


def factorize(n: int) -> dict[int, int]:
    """Trial division; inputs are restricted to |n| < 2^64."""
    n = abs(n)
    if n == 0:
        raise ValueError("cannot factor 0")
    if n >= FACTOR_LIMIT:
        raise ValueError(f"{n} exceeds the trial-division limit 2^64")
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    p = 5
    while p * p <= n:
        for q in (p, p + 2):
            while n % q == 0:
                out[q] = out.get(q, 0) + 1
                n //= q
        p += 6
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_squarefree(n: int) -> bool:
    return all(e == 1 for e in factorize(n).values())


def is_fundamental(d: int) -> bool:
    if d >= 0:
        return False
    if d % 4 == 1:
        return is_squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and is_squarefree(m)
    return False


@dataclass(frozen=True)
class Discriminant:
    value: int
    fundamental_part: int
    conductor: int

    def __int__(self):
        return self.value

    @property
    def abs(self) -> int:
        return -self.value


def _coerce(delta) -> Discriminant:
    return delta if isinstance(delta, Discriminant) else classify_discriminant(delta)


@lru_cache(maxsize=None)
def classify_discriminant(delta: int) -> Discriminant:
    """Split Delta = f^2 d with d a fundamental discriminant."""
    delta = int(delta)
    if delta >= 0 or delta % 4 not in (0, 1):
        raise ValueError(f"{delta} is not a negative discriminant (need Delta < 0, Delta = 0,1 mod 4)")
    f = 1
    for p, e in factorize(delta).items():
        f *= p ** (e // 2)
    # f^2 | Delta; shrink f until Delta / f^2 is fundamental
    for g in sorted(_divisors(f), reverse=True):
        d = delta // (g * g)
        if d % 4 in (0, 1) and is_fundamental(d):
            return Discriminant(delta, d, g)
    raise AssertionError(f"no fundamental part found for {delta}")


def _divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n).items() if n > 1 else []:
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return divs


class ReducedForm(NamedTuple):
    a: int
    b: int
    c: int

    @property
    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def is_reduced(self) -> bool:
        a, b, c = self
        return a > 0 and self.discriminant < 0 and ((-a < b <= a < c) or (0 <= b <= a == c))

    def is_ambiguous(self) -> bool:
        """Order <= 2 in the form class group (for a reduced form)."""
        return self.b == 0 or self.a == self.b or self.a == self.c

    def __str__(self):
        return f"({self.a},{self.b},{self.c})"


@lru_cache(maxsize=None)
def _reduced_forms(delta: int) -> tuple[ReducedForm, ...]:
    forms = []
    bmax = isqrt(-delta // 3)
    for b in range(-bmax, bmax + 1):
        if (b - delta) % 2:
            continue
        n = (b * b - delta) // 4
        # -a < b <= a < c  or  0 <= b <= a = c ; in both cases |b| <= a <= c
        for a in range(max(abs(b), 1), isqrt(n) + 1):
            if n % a:
                continue
            c = n // a
            f = ReducedForm(a, b, c)
            if f.is_reduced():
                forms.append(f)
    forms.sort(key=lambda f: (f.a, f.b))
    return tuple(forms)


def reduced_forms(delta) -> list[ReducedForm]:
    """Primitive reduced forms of discriminant Delta, ordered by (a, b).

    Non-primitive forms such as (2,2,2) for Delta = -12 belong to a smaller
    order and are excluded.
    """
    d = _coerce(delta)
    return [f for f in _reduced_forms(d.value) if _gcd3(f) == 1]


def _gcd3(f: ReducedForm) -> int:
    return gcd(f.a, f.b, f.c)


def class_number(delta) -> int:
    return len(reduced_forms(delta))


def psi(N: int) -> int:
    """Degree N * prod_{p | N} (1 + 1/p) of the modular polynomial Phi_N."""
    if N < 1:
        raise ValueError("psi(N) needs N >= 1")
    out = Fraction(N)
    for p in factorize(N) if N > 1 else []:
        out *= Fraction(p + 1, p)
    assert out.denominator == 1
    return int(out)


def kronecker(d: int, n: int) -> int:
    """Kronecker symbol (d/n) for n >= 1."""
    if n < 1:
        raise ValueError("kronecker symbol implemented for n >= 1")
    result = 1
    for p, e in factorize(n).items() if n > 1 else []:
        if p == 2:
            if d % 2 == 0:
                s = 0
            else:
                s = 1 if d % 8 in (1, 7) else -1
        else:
            s = _legendre(d, p)
        result *= s**e
    return result


def _legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    # Jacobi reciprocity
    result = 1
    n = p
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def unit_index(d: int, f: int) -> int:
    """w_{K,f}: 3 for Q(sqrt -3), 2 for Q(i), when f != 1; otherwise 1."""
    if f == 1:
        return 1
    return {-3: 3, -4: 2}.get(d, 1)


def rcf_degree_ratio(d: int, f: int, c: int) -> Fraction:
    """[K[cf] : K[f]] for the imaginary quadratic field of discriminant d."""
    if not is_fundamental(d):
        raise ValueError(f"{d} is not a fundamental discriminant")
    if f < 1 or c < 1:
        raise ValueError("conductors must be positive")
    ratio = Fraction(unit_index(d, f) * c, unit_index(d, f * c))
    f_primes = set(factorize(f)) if f > 1 else set()
    cf_primes = set(factorize(c * f)) if c * f > 1 else set()
    for p in sorted(cf_primes - f_primes):
        ratio *= 1 - Fraction(kronecker(d, p), p)
    return ratio


def rcf_degree_lower_bound(c: int, prec: int = DEFAULT_PREC) -> arb:
    """(sqrt 6 / 12) * c^(1/2)."""
    if c < 1:
        raise ValueError("c must be positive")
    with workprec(prec):
        return (arb(6) * c).sqrt() / 12


def siegel_tatuzawa_floor(delta, prec: int = DEFAULT_PREC) -> arb:
    """7.4e-4 * |Delta|^(5/12); valid for orders outside the exceptional field."""
    d = _coerce(delta)
    with workprec(prec):
        return arb(fmpq(74, 100000)) * arb(d.abs) ** arb(fmpq(5, 12))


def two_rank(delta) -> int:
    """dim_F2 Pic(O)[2], from the ambiguous reduced forms."""
    count = sum(1 for f in reduced_forms(delta) if f.is_ambiguous())
    r = count.bit_length() - 1
    if 1 << r != count:
        raise AssertionError(f"ambiguous-form count {count} is not a power of two")
    return r


@dataclass(frozen=True)
class TwoRankBound:
    bound: arb          # 4 n^2 |Delta|^(1/n)
    stirling_form: arb  # 4 (n!)^(1/n) |Delta|^(1/n)


def two_rank_bound(delta, n: int, prec: int = DEFAULT_PREC) -> TwoRankBound:
    if n < 1:
        raise ValueError("n must be >= 1")
    d = _coerce(delta)
    with workprec(prec):
        root = arb(d.abs) ** arb(fmpq(1, n))
        bound = 4 * n * n * root
        stirling = 4 * arb(n).fac() ** arb(fmpq(1, n)) * root
    return TwoRankBound(bound, stirling)


def discriminants_up_to(cap: int) -> list[int]:
    """Negative discriminants with |Delta| <= cap, ordered by |Delta|."""
    return [-D for D in range(3, cap + 1) if (-D) % 4 in (0, 1)]
