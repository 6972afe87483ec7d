"""Certified enumeration of special points on a linear subvariety.

For every equality pattern the subvariety is cut down to the diagonal and
projected to A^r.  The projected L2 is parametrized by the pivot
coordinates of its rref direction basis; those coordinates run over all
singular moduli under the cap and the remaining coordinates are looked up
in a float table.  Every hit is then decided in ball arithmetic against a
Liouville gap, so floats only ever propose candidates.

flint's precision is process-global, so all ball work happens on the
calling thread.  Worker threads run the numpy lookup only.
"""

from __future__ import annotations

import enum
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from flint import acb, arb

from .balls import PrecisionError, arb_from_fraction, exact_of, workprec
from .bounds import discriminant_cap, lemma_c1, log_plus
from .exact_linear import Empty, LinearSubvariety, as_fraction
from .heights import affine_height, rational_height, reduce_to_hyperplane, subspace_height
from .modular_eval import (
    DEFAULT_RADIUS,
    SingularModulus,
    log_j_height_bound,
    singular_modulus,
)
from .quadratic import class_number, discriminants_up_to, reduced_forms
from .special_geometry import (
    EqualityPattern,
    diagonal_specials_in,
    pattern_is_special,
    project_by_pattern,
    set_partitions,
)

REFUSAL_THRESHOLD = 10**6
REPORT_FORMAT = 1
MAX_ESCALATIONS = 6
# Relative window of the float lookup.  Double evaluation of an affine form
# in at most a few dozen terms errs by < 1e-14 of the sum of absolute
# values; 1e-6 leaves eight orders of magnitude of slack.
LOOKUP_REL_TOL = 1e-6


def enumerate_singular_moduli(cap: int, radius=DEFAULT_RADIUS) -> list[SingularModulus]:
    """All singular moduli with |Delta| <= cap, ordered by (|Delta|, a, b)."""
    if cap < 3:
        raise ValueError("cap must be at least 3 (the smallest |Delta|)")
    return [
        singular_modulus(delta, f, radius)
        for delta in discriminants_up_to(cap)
        for f in reduced_forms(delta)
    ]


# ---------------------------------------------------------------------------
# zero certification


class Status(enum.Enum):
    ZERO = "zero"
    NONZERO = "nonzero"
    NEEDS_PRECISION = "needs_precision"


@dataclass(frozen=True)
class Certificate:
    status: Status
    residual_upper: arb       # upper bound for |sum a_i j_i + b|
    log_gap: arb | None       # log of the Liouville gap (None: decided exactly)
    degree_bound: int
    wanted_radius: Fraction | None = None


def _group_terms(a: Sequence, moduli: Sequence[SingularModulus]):
    """Merge equal moduli; drop terms whose coefficients cancel."""
    terms: dict = {}
    for c, m in zip(a, moduli):
        c = as_fraction(c)
        if m.key in terms:
            terms[m.key] = (terms[m.key][0] + c, terms[m.key][1])
        else:
            terms[m.key] = (c, m)
    return [(c, m) for c, m in terms.values() if c != 0]


def degree_bound(moduli: Sequence[SingularModulus]) -> int:
    """Upper bound for [Q(j_1, ..., j_k) : Q] over distinct moduli.

    Moduli of one discriminant generate a subfield of the ring class field,
    of degree 2h over Q; a single one has degree h.
    """
    by_disc: dict[int, set] = {}
    for m in moduli:
        by_disc.setdefault(m.discriminant, set()).add(m.key)
    D = 1
    for delta, keys in by_disc.items():
        h = class_number(delta)
        D *= h if len(keys) == 1 else min(h ** len(keys), 2 * h)
    return D


def certify_zero(a: Sequence, b, moduli: Sequence[SingularModulus]) -> Certificate:
    """Decide whether sum a_i j_i + b vanishes, using the Liouville gap.

    Height of the sum: H(x y) <= H(x) H(y) and H(x_1 + ... + x_t) <= 2^(t-1)
    prod H(x_i), with H(j) <= 11 exp(pi sqrt|Delta|).
    """
    if len(a) != len(moduli):
        raise ValueError("coefficient and moduli counts differ")
    b = as_fraction(b)
    terms = _group_terms(a, moduli)
    if not terms:
        status = Status.ZERO if b == 0 else Status.NONZERO
        return Certificate(status, arb_from_fraction(abs(b)), None, 1)
    prec = max(m.precision_bits for _, m in terms) + 64
    with workprec(prec):
        s = acb(arb_from_fraction(b))
        log_h = arb(0)
        coeff_sum = abs(b)
        for c, m in terms:
            s += arb_from_fraction(c) * m.value
            log_h += arb(rational_height(c)).log() + log_j_height_bound(m.discriminant, prec)
            coeff_sum += abs(c)
        t = len(terms) + (b != 0)
        log_h += (t - 1) * arb(2).log()
        if b != 0:
            log_h += arb(rational_height(b)).log()
        D = degree_bound([m for _, m in terms])
        log_gap = (-(log_h.upper() * D)).lower()
        gap = log_gap.exp().lower()
        resid = abs(s).upper()
        if resid < gap:
            status = Status.ZERO
        elif not s.real.contains(0) or not s.imag.contains(0):
            status = Status.NONZERO
        else:
            status = Status.NEEDS_PRECISION
        wanted = None
        if status is Status.NEEDS_PRECISION:
            # |S - S_true| <= 2 sum|c| r ensures a decision once 4 sum|c| r < gap
            bits = math.ceil(-float(log_gap) / math.log(2)) + 2 + math.ceil(4 * coeff_sum).bit_length()
            wanted = Fraction(1, 1 << max(bits, 1))
    return Certificate(status, resid, log_gap, D, wanted)


class Undecided(Exception):
    """Certification hit the precision ceiling."""


def certify_with_escalation(a: Sequence, b, moduli: Sequence[SingularModulus],
                            max_precision: int | None = None) -> Certificate:
    """certify_zero, re-evaluating the moduli to smaller radii when needed.

    ``max_precision`` caps the radius exponent (in bits) that may be requested.
    """
    cert = certify_zero(a, b, moduli)
    for _ in range(MAX_ESCALATIONS):
        if cert.status is not Status.NEEDS_PRECISION:
            return cert
        radius = cert.wanted_radius
        if max_precision is not None and radius.denominator.bit_length() > max_precision:
            raise Undecided(f"needs about {radius.denominator.bit_length()} bits, limit {max_precision}")
        try:
            moduli = [singular_modulus(m.discriminant, m.form, radius) for m in moduli]
        except PrecisionError as exc:
            raise Undecided(str(exc)) from exc
        cert = certify_zero(a, b, moduli)
        if cert.status is Status.NEEDS_PRECISION:
            cert = Certificate(cert.status, cert.residual_upper, cert.log_gap, cert.degree_bound,
                               min(cert.wanted_radius, radius / 2**64))
    if cert.status is Status.NEEDS_PRECISION:
        raise Undecided("precision escalation did not converge")
    return cert


def point_on(L: LinearSubvariety, point: Sequence) -> bool:
    """Certified membership of a point with singular-modulus (or rational) coordinates."""
    if len(point) != L.ambient_dim:
        raise ValueError("point and subvariety dimensions differ")
    for a, b in L.equations():
        coeffs, moduli, const = [], [], Fraction(b)
        for ai, x in zip(a, point):
            if isinstance(x, SingularModulus):
                coeffs.append(ai)
                moduli.append(x)
            else:
                const += ai * as_fraction(x)
        try:
            cert = certify_with_escalation(coeffs, const, moduli)
        except Undecided as exc:
            raise PrecisionError(f"membership undecided: {exc}") from exc
        if cert.status is Status.NONZERO:
            return False
    return True


# ---------------------------------------------------------------------------
# float lookup


@dataclass
class _Table:
    moduli: list[SingularModulus]
    re: np.ndarray
    im: np.ndarray
    order: np.ndarray        # indices sorting re
    re_sorted: np.ndarray
    envelope: float          # max |j| over the table's discriminants, plus slack

    @classmethod
    def build(cls, moduli: list[SingularModulus], cap: int) -> "_Table":
        z = np.array([m.to_complex() for m in moduli], dtype=complex)
        order = np.argsort(z.real, kind="stable")
        env = math.exp(math.pi * math.sqrt(cap)) + 2079.0
        return cls(moduli, z.real.copy(), z.imag.copy(), order, z.real[order], env * (1 + 1e-9) + 1)


@dataclass(frozen=True)
class _Param:
    """z = offset + sum_k t_k d_k with t_k = z_{pivot_k} (rref direction rows)."""

    r: int
    pivots: tuple[int, ...]
    dependents: tuple[int, ...]
    offset: tuple[float, ...]
    coeff: tuple[tuple[float, ...], ...]   # coeff[q][k] = d_k[q] for dependent q

    @classmethod
    def of(cls, L2: LinearSubvariety) -> "_Param":
        dirs = L2.direction_vectors()
        pivots = tuple(next(i for i, x in enumerate(d) if x != 0) for d in dirs)
        deps = tuple(i for i in range(L2.ambient_dim) if i not in pivots)
        return cls(
            L2.ambient_dim,
            pivots,
            deps,
            tuple(float(x) for x in L2.offset),
            tuple(tuple(float(d[q]) for d in dirs) for q in deps),
        )


def _match(table: _Table, target: np.ndarray, scale: np.ndarray, prune: bool):
    """(row, modulus index) pairs with the modulus within the window of target."""
    tol = LOOKUP_REL_TOL * scale + 1e-9
    keep = np.ones(target.shape, dtype=bool)
    pruned = 0
    if prune:
        keep = np.abs(target) <= table.envelope + tol
        pruned = int((~keep).sum())
    rows = np.nonzero(keep)[0]
    lo = np.searchsorted(table.re_sorted, target.real[rows] - tol[rows], side="left")
    hi = np.searchsorted(table.re_sorted, target.real[rows] + tol[rows], side="right")
    counts = hi - lo
    out_rows = np.repeat(rows, counts)
    starts = np.repeat(lo, counts)
    offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    idx = table.order[starts + offs]
    ok = np.abs(table.im[idx] - target.imag[out_rows]) <= tol[out_rows]
    return out_rows[ok], idx[ok], pruned


def _unit(table: _Table, param: _Param, first: int | None, prune: bool):
    """Candidate r-tuples (as index arrays) for one value of the first free coordinate."""
    M = len(table.moduli)
    l = len(param.pivots)
    if l == 0:
        free = np.zeros((1, 0), dtype=np.int64)
    else:
        rest = np.indices((M,) * (l - 1)).reshape(l - 1, -1).T if l > 1 else np.zeros((1, 0), dtype=np.int64)
        free = np.hstack([np.full((rest.shape[0], 1), first, dtype=np.int64), rest])
    enumerated = free.shape[0]
    zfree = table.re[free] + 1j * table.im[free]
    cols = {p: free[:, k] for k, p in enumerate(param.pivots)}
    rows = np.arange(free.shape[0])
    pruned = 0
    for q, coeff, off in zip(param.dependents, param.coeff, (param.offset[q] for q in param.dependents)):
        zf = zfree[rows]
        target = off + zf @ np.array(coeff, dtype=float) if l else np.full(len(rows), off, dtype=complex)
        scale = abs(off) + (np.abs(zf) @ np.abs(np.array(coeff, dtype=float)) if l else 0.0)
        scale = np.broadcast_to(scale, target.shape).astype(float)
        if prune:
            sub_rows, idx, pr = _match(table, target.astype(complex), scale, True)
            pruned += pr
        else:
            sub_rows = np.repeat(np.arange(len(rows)), M)
            idx = np.tile(np.arange(M), len(rows))
        rows = rows[sub_rows]
        for p in cols:
            cols[p] = cols[p][sub_rows]
        cols[q] = idx
    if not len(rows):
        return np.zeros((0, param.r), dtype=np.int64), enumerated, pruned
    tuples = np.stack([cols[i] for i in range(param.r)], axis=1)
    # coordinates in different blocks must be distinct moduli
    srt = np.sort(tuples, axis=1)
    distinct = np.all(srt[:, 1:] != srt[:, :-1], axis=1) if param.r > 1 else np.ones(len(tuples), bool)
    return tuples[distinct], enumerated, pruned


def _candidate_tuples(table: _Table, param: _Param, prune: bool, threads: int):
    M = len(table.moduli)
    firsts = list(range(M)) if param.pivots else [None]
    if threads > 1 and len(firsts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda f: _unit(table, param, f, prune), firsts))
    else:
        parts = [_unit(table, param, f, prune) for f in firsts]
    enumerated = sum(p[1] for p in parts)
    pruned = sum(p[2] for p in parts)
    arrays = [p[0] for p in parts if len(p[0])]
    tuples = np.concatenate(arrays) if arrays else np.zeros((0, param.r), dtype=np.int64)
    if len(tuples):
        tuples = np.unique(tuples, axis=0)   # lexicographic, duplicate-free
    return [tuple(int(i) for i in t) for t in tuples], enumerated, pruned


# ---------------------------------------------------------------------------
# reports


def _modulus_json(m: SingularModulus) -> dict:
    return {
        "discriminant": m.discriminant,
        "form": list(m.form),
        "value": _cstr(singular_modulus(m.discriminant, m.form).value),
    }


def _cstr(z: acb, digits: int = 25) -> str:
    re = z.real.str(digits, radius=True)
    if z.imag.is_zero():
        return re
    return f"{re} + ({z.imag.str(digits, radius=True)})*I"


def _frac_str(x) -> str:
    x = as_fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class SpecialPointCandidate:
    coordinates: tuple[SingularModulus, ...]
    pattern: EqualityPattern
    certified: bool
    residual_bound: arb

    def keys(self):
        return tuple(m.key for m in self.coordinates)

    def to_json(self) -> dict:
        return {
            "coordinates": [_modulus_json(m) for m in self.coordinates],
            "pattern": self.pattern.to_json(),
            "certified": self.certified,
            "residual_bound": self.residual_bound.str(6),
        }


@dataclass
class SolveReport:
    """Everything a solve produced, as JSON-ready values."""

    input: dict
    height: dict
    bound: dict
    cap: dict
    assume_no_exceptional_field: bool
    diagonal_specials: list
    special_patterns: list
    points: list
    undecided: list
    statistics: dict
    complete: bool
    refused: bool
    format: int = REPORT_FORMAT
    _points: list = field(default_factory=list, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "format": self.format,
            "input": self.input,
            "height": self.height,
            "bound": self.bound,
            "cap": self.cap,
            "assume_no_exceptional_field": self.assume_no_exceptional_field,
            "diagonal_specials": self.diagonal_specials,
            "special_patterns": self.special_patterns,
            "points": self.points,
            "undecided": self.undecided,
            "statistics": self.statistics,
            "complete": self.complete,
            "refused": self.refused,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SolveReport":
        if data.get("format") != REPORT_FORMAT:
            raise ValueError(f"unsupported report format {data.get('format')!r}")
        keys = [k for k in cls.__dataclass_fields__ if not k.startswith("_") and k != "format"]
        return cls(**{k: data[k] for k in keys}, format=data["format"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "SolveReport":
        return cls.from_dict(json.loads(text))

    @property
    def exit_code(self) -> int:
        if self.refused:
            return 3
        return 0 if self.complete else 2

    def point_keys(self) -> set:
        return {
            tuple((c["discriminant"], *c["form"]) for c in p["coordinates"])
            for p in self.points
        }

    def candidates(self) -> list[SpecialPointCandidate]:
        """Live objects for the reported points (empty after a JSON round trip)."""
        return list(self._points)


def subvariety_json(L: LinearSubvariety) -> dict:
    return {
        "ambient_dim": L.ambient_dim,
        "equations": [[[str(x) for x in a], str(b)] for a, b in L.equations()],
    }


# ---------------------------------------------------------------------------
# solver


def _certify_tuple(L2: LinearSubvariety, hyperplane, moduli, max_precision=None) -> tuple[Status, arb]:
    worst = arb(0)
    if hyperplane is not None:
        a, b = hyperplane
        cert = certify_with_escalation(a, b, moduli, max_precision)
        if cert.status is Status.NONZERO:
            return Status.NONZERO, cert.residual_upper
        worst = cert.residual_upper
    for a, b in L2.equations():
        cert = certify_with_escalation(a, b, moduli, max_precision)
        if cert.status is Status.NONZERO:
            return Status.NONZERO, cert.residual_upper
        worst = max(worst, cert.residual_upper, key=lambda x: exact_of(x))
    return Status.ZERO, worst


@dataclass
class _Stats:
    patterns: int = 0
    empty_patterns: int = 0
    special_patterns: int = 0
    enumerated: int = 0
    pruned: int = 0
    candidates: int = 0
    certified: int = 0
    rejected_nonzero: int = 0
    undecided: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _stream(L: LinearSubvariety, pattern: EqualityPattern, table: _Table, prune: bool, threads: int,
            stats: _Stats, points: list, undecided: list, require_outside_special: bool = True,
            max_precision: int | None = None) -> str:
    """Process one equality pattern; returns "empty", "special" or "searched"."""
    proj = project_by_pattern(L, pattern)
    if proj.L2 is Empty:
        stats.empty_patterns += 1
        return "empty"
    # Every tuple in this stream has exactly this pattern, so Z^sp membership
    # is decided once for the whole stream.
    if require_outside_special and (proj.fully_special or pattern_is_special(L, pattern)):
        stats.special_patterns += 1
        return "special"
    L2 = proj.L2
    hyperplane = reduce_to_hyperplane(L2) if not L2.is_full() else None
    tuples, enumerated, pruned = _candidate_tuples(table, _Param.of(L2), prune, threads)
    stats.enumerated += enumerated
    stats.pruned += pruned
    stats.candidates += len(tuples)
    for t in tuples:
        moduli = [table.moduli[i] for i in t]
        try:
            status, resid = _certify_tuple(L2, hyperplane, moduli, max_precision)
        except Undecided as exc:
            stats.undecided += 1
            undecided.append({
                "coordinates": [_modulus_json(m) for m in proj.lift(moduli)],
                "pattern": pattern.to_json(),
                "reason": str(exc),
            })
            continue
        if status is Status.NONZERO:
            stats.rejected_nonzero += 1
            continue
        stats.certified += 1
        points.append((t, SpecialPointCandidate(proj.lift(moduli), pattern, True, resid)))
    return "searched"


def default_threads() -> int:
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1))


def solve(L: LinearSubvariety, user_cap: int | None = None, degree: int = 1, *, threads: int | None = None,
          prune: bool = True, refusal_threshold: int = REFUSAL_THRESHOLD,
          max_precision: int | None = None) -> SolveReport:
    """Special points of L outside Z^sp with all |Delta_i| <= the effective cap."""
    if not isinstance(L, LinearSubvariety):
        raise ValueError("the subvariety is empty")
    if L.is_full():
        raise ValueError("L must be a proper subvariety")
    if user_cap is not None and user_cap < 3:
        raise ValueError("cap must be at least 3")
    threads = default_threads() if threads is None else max(1, int(threads))
    br = discriminant_cap(L, degree)
    h = subspace_height(L)
    theorem_cap = br.discriminant_cap
    if user_cap is None or theorem_cap <= user_cap:
        eff, source = theorem_cap, "theorem"
    else:
        eff, source = user_cap, "user"
    refused = eff > refusal_threshold
    cap_info = {
        "effective": str(eff),
        "source": source,
        "user": None if user_cap is None else str(user_cap),
        "theorem": str(theorem_cap),
        "refusal_threshold": str(refusal_threshold),
    }
    common = dict(
        input={**subvariety_json(L), "user_cap": user_cap, "degree": degree},
        height={"square": _frac_str(h.square), "value": h.value.str(25, radius=True),
                "log": h.log_value.str(25, radius=True)},
        bound={"n": br.n, "degree": degree, "c1": str(br.c1), "c2": _frac_str(br.c2),
               "sqrt_cap": br.sqrt_cap.str(25, radius=True), "discriminant_cap": str(theorem_cap)},
        cap=cap_info,
        assume_no_exceptional_field=False,
        diagonal_specials=[d.to_json() for d in diagonal_specials_in(L)],
    )
    if refused:
        return SolveReport(**common, special_patterns=[], points=[], undecided=[],
                           statistics=_Stats().as_dict(), complete=False, refused=True)

    table = _Table.build(enumerate_singular_moduli(eff), eff)
    stats = _Stats()
    found: list = []
    undecided: list = []
    special = []
    for pattern in set_partitions(L.ambient_dim):
        stats.patterns += 1
        if _stream(L, pattern, table, prune, threads, stats, found, undecided,
                   max_precision=max_precision) == "special":
            special.append(pattern.to_json())
    order = {m.key: i for i, m in enumerate(table.moduli)}
    found.sort(key=lambda tp: tuple(order[m.key] for m in tp[1].coordinates))
    seen, cands = set(), []
    for _, c in found:
        if c.keys() not in seen:
            seen.add(c.keys())
            cands.append(c)
    return SolveReport(
        **common,
        special_patterns=special,
        points=[c.to_json() for c in cands],
        undecided=undecided,
        statistics=stats.as_dict(),
        complete=not undecided,
        refused=False,
        _points=cands,
    )


# ---------------------------------------------------------------------------
# linear equations in distinct singular moduli


@dataclass(frozen=True)
class LemmaSolution:
    moduli: tuple[SingularModulus, ...]
    sqrt_disc: arb
    margin: arb

    def to_json(self) -> dict:
        return {
            "coordinates": [_modulus_json(m) for m in self.moduli],
            "max_sqrt_abs_discriminant": self.sqrt_disc.str(15, radius=True),
            "margin": self.margin.str(15, radius=True),
        }


@dataclass(frozen=True)
class LemmaReport:
    a: tuple[Fraction, ...]
    b: Fraction
    cap: int
    bound: arb
    same_field_bound: arb
    solutions: tuple[LemmaSolution, ...]
    undecided: tuple
    violations: int

    @property
    def holds(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {
            "a": [_frac_str(x) for x in self.a],
            "b": _frac_str(self.b),
            "cap": self.cap,
            "c1": self.bound.str(15, radius=True),
            "c1_same_field": self.same_field_bound.str(15, radius=True),
            "solutions": [s.to_json() for s in self.solutions],
            "undecided": list(self.undecided),
            "violations": self.violations,
        }


def verify_lemma31(a: Sequence, b, cap: int, *, threads: int | None = None, prune: bool = True) -> LemmaReport:
    """Solve sum a_i j(tau_i) + b = 0 in distinct moduli under the cap and test the c1 bound."""
    a = tuple(as_fraction(x) for x in a)
    b = as_fraction(b)
    if not a:
        raise ValueError("at least one coefficient is needed")
    if any(x == 0 for x in a):
        raise ValueError("all coefficients must be nonzero")
    k = len(a)
    L = LinearSubvariety.from_equations([(a, b)])
    threads = default_threads() if threads is None else max(1, int(threads))
    log_h0 = affine_height(a).log_value
    log_h = affine_height(a + (b,)).log_value
    c1 = lemma_c1(k, log_h0, log_plus(b), 1, 1, log_H=log_h)
    table = _Table.build(enumerate_singular_moduli(cap), cap)
    stats = _Stats()
    found: list = []
    undecided: list = []
    _stream(L, EqualityPattern.trivial(k), table, prune, threads, stats, found, undecided,
            require_outside_special=False)
    order = {m.key: i for i, m in enumerate(table.moduli)}
    found.sort(key=lambda tp: tuple(order[m.key] for m in tp[1].coordinates))
    sols = []
    violations = 0
    with workprec(128):
        for _, c in found:
            top = max(abs(m.discriminant) for m in c.coordinates)
            s = arb(top).sqrt()
            margin = c1.general - s
            if not margin > 0:
                violations += 1
            sols.append(LemmaSolution(c.coordinates, s, margin))
    return LemmaReport(a, b, cap, c1.general, c1.same_field, tuple(sols), tuple(undecided), violations)
