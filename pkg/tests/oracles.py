"""Independent reference implementations used only by the tests.

None of these reuse the package's algorithms: linear algebra goes through
sympy, class numbers through a plain integer scan, and the special-point
oracle enumerates every tuple and tests every defining equation of L.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from math import gcd, isqrt

import numpy as np
import sympy

from cmlinear.search import Status, certify_with_escalation


def sympy_matrix(rows):
    return sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) if isinstance(x, Fraction) else x
                          for x in r] for r in rows])


def cofactor_det(rows) -> Fraction:
    n = len(rows)
    if n == 0:
        return Fraction(1)
    if n == 1:
        return Fraction(rows[0][0])
    total = Fraction(0)
    for j in range(n):
        if rows[0][j] == 0:
            continue
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        total += (-1) ** j * Fraction(rows[0][j]) * cofactor_det(minor)
    return total


def brute_reduced_forms(delta: int) -> list[tuple[int, int, int]]:
    """Scan a <= sqrt(|Delta|/3) and every |b| <= a; keep reduced primitive forms."""
    out = []
    amax = isqrt(-delta // 3) + 1
    for a in range(1, amax + 1):
        for b in range(-a, a + 1):
            num = b * b - delta
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or gcd(gcd(a, b), c) != 1:
                continue
            if (-a < b <= a < c) or (0 <= b <= a == c):
                out.append((a, b, c))
    return sorted(out)


def power_set_nonempty(items):
    items = list(items)
    for r in range(1, len(items) + 1):
        yield from itertools.combinations(items, r)


def zsp_oracle(L, keys) -> bool:
    """Z^sp test through the equations of L.

    For the equal-coordinate blocks of P and every nonempty subset B of a
    block, the line z_i = t (i in B), z_j = P_j (j not in B) lies in L iff
    every equation a.z + b = 0 of L has sum_{i in B} a_i = 0.
    """
    eqs = L.equations()
    blocks: dict = {}
    for i, k in enumerate(keys):
        blocks.setdefault(k, []).append(i)
    for block in blocks.values():
        for B in power_set_nonempty(block):
            if all(sum(a[i] for i in B) == 0 for a, _ in eqs):
                return True
    return False


def brute_force_special_points(L, moduli, chunk: int = 1 << 18):
    """Every n-tuple of moduli on L outside Z^sp, with no pattern split and no lookup.

    A tuple is discarded early only when double arithmetic shows some
    equation of L is nonzero.  The moduli balls have radius <= 1e-20 and
    the double evaluation errs by a few ulps of ``scale``, so a residual
    above 1e-9 * scale + 1e-9 cannot come from a true zero.  This is a
    rounding bound, not a search heuristic.  Every survivor is then decided
    by ball certification of every equation.
    """
    n = L.ambient_dim
    M = len(moduli)
    z = np.array([m.to_complex() for m in moduli])
    eqs = L.equations()
    keys = [m.key for m in moduli]
    survivors = []
    total = M ** n
    for start in range(0, total, chunk):
        flat = np.arange(start, min(total, start + chunk))
        idx = np.stack(np.unravel_index(flat, (M,) * n), axis=1)
        keep = np.ones(len(idx), dtype=bool)
        for a, b in eqs:
            acc = np.full(len(idx), complex(b))
            scale = np.full(len(idx), abs(float(b)))
            for i, ai in enumerate(a):
                if ai:
                    acc = acc + float(ai) * z[idx[:, i]]
                    scale = scale + abs(float(ai)) * np.abs(z[idx[:, i]])
            keep &= np.abs(acc) <= 1e-9 * scale + 1e-9
        survivors.extend(tuple(int(x) for x in row) for row in idx[keep])
    out = set()
    zsp_cache: dict = {}
    for t in survivors:
        point = [moduli[i] for i in t]
        pattern_key = tuple(t.index(i) for i in t)
        if pattern_key not in zsp_cache:
            zsp_cache[pattern_key] = zsp_oracle(L, [keys[i] for i in t])
        if zsp_cache[pattern_key]:
            continue
        ok = True
        for a, b in eqs:
            cert = certify_with_escalation(a, b, point)
            if cert.status is Status.NONZERO:
                ok = False
                break
        if ok:
            out.add(tuple(keys[i] for i in t))
    return out


def halton(index: int, base: int) -> float:
    f, r = 1.0, 0.0
    while index > 0:
        f /= base
        r += f * (index % base)
        index //= base
    return r


def random_subvariety(rng, n: int, max_height: int = 50):
    """Random proper L over Q with H(L) <= max_height (rejection sampling).

    Constants are zero half of the time so that points such as (0, ..., 0),
    where j = 0 at Delta = -3, occur on L.
    """
    from cmlinear.exact_linear import LinearSubvariety
    from cmlinear.heights import subspace_height

    while True:
        k = rng.randint(1, n)
        eqs = []
        for _ in range(k):
            a = [rng.choice([0, 0, 1, -1, 1, -1, 2, -2, 3, -3, 5]) for _ in range(n)]
            if not any(a):
                continue
            b = 0 if rng.random() < 0.5 else rng.randint(-12, 12)
            eqs.append((a, b))
        if not eqs:
            continue
        L = LinearSubvariety.from_equations(eqs, n)
        if not L or L.is_full():
            continue
        if subspace_height(L).square <= max_height ** 2:
            return L
