"""Diagonal subvarieties, equality-pattern projections and Z^sp membership.

Coordinates are 0-based internally; patterns print 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterator, Sequence

from flint import arb

from .balls import DEFAULT_PREC, arb_from_fraction, workprec
from .exact_linear import (
    Empty,
    ExactMatrix,
    LinearSubvariety,
    as_fraction,
    contains_direction,
    contains_point,
    intersect,
    minors,
    primitive_integer_vector,
)
from .heights import HeightValue, subspace_height


@dataclass(frozen=True)
class EqualityPattern:
    """Set partition of {0..n-1}; blocks sorted internally and by minimum."""

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(sorted((tuple(sorted(b)) for b in self.blocks), key=lambda b: b[0] if b else -1))
        if any(not b for b in blocks):
            raise ValueError("pattern blocks must be nonempty")
        flat = sorted(i for b in blocks for i in b)
        if flat != list(range(len(flat))):
            raise ValueError(f"blocks {blocks} do not partition 0..{len(flat) - 1}")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def trivial(cls, n: int) -> "EqualityPattern":
        return cls(tuple((i,) for i in range(n)))

    @classmethod
    def of_keys(cls, keys: Sequence) -> "EqualityPattern":
        """Pattern of exact equalities among hashable coordinate identities."""
        groups: dict = {}
        for i, k in enumerate(keys):
            groups.setdefault(k, []).append(i)
        return cls(tuple(tuple(g) for g in groups.values()))

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def r(self) -> int:
        return len(self.blocks)

    def is_trivial(self) -> bool:
        return self.r == self.n

    def representatives(self) -> tuple[int, ...]:
        """Largest index of each block (the coordinate kept by the projection)."""
        return tuple(b[-1] for b in self.blocks)

    def block_of(self) -> tuple[int, ...]:
        out = [0] * self.n
        for k, b in enumerate(self.blocks):
            for i in b:
                out[i] = k
        return tuple(out)

    def refines(self, other: "EqualityPattern") -> bool:
        """Every block of self lies inside a block of other."""
        owner = other.block_of()
        return all(len({owner[i] for i in b}) == 1 for b in self.blocks)

    def __str__(self):
        return "{" + ",".join("{" + ",".join(str(i + 1) for i in b) + "}" for b in self.blocks) + "}"

    def to_json(self) -> list[list[int]]:
        return [[i + 1 for i in b] for b in self.blocks]

    @classmethod
    def from_json(cls, data) -> "EqualityPattern":
        return cls(tuple(tuple(i - 1 for i in b) for b in data))


def set_partitions(n: int) -> Iterator[EqualityPattern]:
    """All Bell(n) patterns, in a fixed deterministic order (trivial first)."""
    if n < 1:
        raise ValueError("n must be >= 1")

    def rec(i: int, blocks: list[list[int]]):
        if i == n:
            yield EqualityPattern(tuple(tuple(b) for b in blocks))
            return
        blocks.append([i])
        yield from rec(i + 1, blocks)
        blocks.pop()
        for b in blocks:
            b.append(i)
            yield from rec(i + 1, blocks)
            b.pop()

    yield from rec(0, [])


def indicator(n: int, subset) -> tuple[Fraction, ...]:
    s = set(subset)
    return tuple(Fraction(int(i in s)) for i in range(n))


def diagonal_of(pattern: EqualityPattern) -> LinearSubvariety:
    n = pattern.n
    return LinearSubvariety.from_basis([indicator(n, b) for b in pattern.blocks], [0] * n)


@dataclass(frozen=True)
class DiagonalHeight:
    height: HeightValue
    block_bounds: tuple[arb, ...]   # 2^(m-1) sqrt(m) per block
    product_bound: arb


def diagonal_height(pattern: EqualityPattern, prec: int = DEFAULT_PREC) -> DiagonalHeight:
    h = subspace_height(diagonal_of(pattern), prec)
    with workprec(prec):
        per_block = tuple(arb(2) ** (len(b) - 1) * arb(len(b)).sqrt() for b in pattern.blocks)
        prod = arb(1)
        for x in per_block:
            prod *= x
    # H(Z)^2 = prod m_i exactly; the bound squared is prod 4^(m_i - 1) m_i
    bound_sq = 1
    for b in pattern.blocks:
        bound_sq *= 4 ** (len(b) - 1) * len(b)
    if h.square > bound_sq:
        raise AssertionError(f"diagonal height exceeds its bound for {pattern}")
    return DiagonalHeight(h, per_block, prod)


@dataclass(frozen=True)
class Projection:
    pattern: EqualityPattern
    L1: object            # LinearSubvariety or Empty, inside A^n
    L2: object            # LinearSubvariety or Empty, inside A^r
    fully_special: bool   # L1 equals the whole diagonal (so L2 = A^r)

    @property
    def r(self) -> int:
        return self.pattern.r

    def lift(self, point: Sequence) -> tuple:
        """Inverse of the projection on the diagonal: copy each value across its block."""
        if len(point) != self.r:
            raise ValueError("point has the wrong length")
        out = [None] * self.pattern.n
        for v, b in zip(point, self.pattern.blocks):
            for i in b:
                out[i] = v
        return tuple(out)


def project_vector(pattern: EqualityPattern, v: Sequence) -> tuple:
    return tuple(v[i] for i in pattern.representatives())


def project_by_pattern(L: LinearSubvariety, pattern: EqualityPattern) -> Projection:
    if L.ambient_dim != pattern.n:
        raise ValueError("pattern and subvariety live in different dimensions")
    L1 = intersect(L, diagonal_of(pattern))
    if L1 is Empty:
        return Projection(pattern, Empty, Empty, False)
    L2 = LinearSubvariety.from_basis(
        [project_vector(pattern, d) for d in L1.direction_vectors()],
        project_vector(pattern, L1.offset),
    )
    assert L2.dim == L1.dim
    return Projection(pattern, L1, L2, L2.is_full())


def weighted_minor_square(L2: LinearSubvariety, pattern: EqualityPattern) -> Fraction:
    """H(L1)^2 from the projected basis.

    Each minor of the projected homogenized basis enters with weight equal
    to the product of the sizes of the blocks its rows come from (the
    homogenizing row has weight 1); the content is that of the unweighted
    minor vector.
    """
    sizes = [len(b) for b in pattern.blocks] + [1]
    h = L2.homogenized_basis()
    mins = minors(h, h.cols)
    prim = primitive_integer_vector(list(mins.values()))
    total = Fraction(0)
    for rows, x in zip(mins, prim):
        w = 1
        for i in rows:
            w *= sizes[i]
        total += w * x * x
    return total


# ---------------------------------------------------------------------------
# special subvarieties contained in L


def _coordinate_key(x):
    key = getattr(x, "key", None)
    return key if key is not None else as_fraction(x)


def _point_in(L: LinearSubvariety, point: Sequence) -> bool:
    if all(getattr(x, "key", None) is None for x in point):
        return contains_point(L, point)
    from .search import point_on  # local import: search depends on this module

    return point_on(L, point)


def in_positive_dim_special(L: LinearSubvariety, point: Sequence, *, check_membership: bool = True) -> bool:
    """Does a positive-dimensional special subvariety inside L pass through P?

    Coordinates are SingularModulus objects (compared by their (Delta, form)
    identity) or exact rationals.  The answer is yes exactly when, for some
    block of equal coordinates, the indicator of a nonempty subset of that
    block lies in the direction space of L.
    """
    if len(point) != L.ambient_dim:
        raise ValueError("point and subvariety dimensions differ")
    if check_membership and not _point_in(L, point):
        raise ValueError("the point does not lie on L")
    return pattern_is_special(L, EqualityPattern.of_keys([_coordinate_key(x) for x in point]))


def pattern_is_special(L: LinearSubvariety, pattern: EqualityPattern) -> bool:
    """Whether every point of L with exactly this equality pattern lies in Z^sp.

    The criterion only looks at the blocks, never at the coordinate values.
    """
    if L.dim == 0:
        return False
    n = L.ambient_dim
    return any(_block_has_special_line(L, n, b) for b in pattern.blocks)


def _block_has_special_line(L: LinearSubvariety, n: int, block: tuple[int, ...]) -> bool:
    # The block's slice of dir(L) decides this; check it is nonzero first.
    others = [i for i in range(n) if i not in block]
    if others:
        sub = LinearSubvariety.from_equations([(indicator(n, [i]), 0) for i in others], n)
        if intersect(LinearSubvariety.from_basis(L.direction_vectors(), [0] * n), sub).dim == 0:
            return False
    for size in range(1, len(block) + 1):
        for subset in combinations(block, size):
            if contains_direction(L, indicator(n, subset)):
                return True
    return False


@dataclass(frozen=True)
class DiagonalSpecial:
    pattern: EqualityPattern
    maximal: bool

    def to_json(self) -> dict:
        return {"pattern": self.pattern.to_json(), "maximal": self.maximal}


def diagonal_specials_in(L: LinearSubvariety) -> list[DiagonalSpecial]:
    """Patterns whose whole diagonal lies in L; maximal = no finer such pattern."""
    n = L.ambient_dim
    zero = [0] * n
    if not contains_point(L, zero):
        return []
    hits = [
        p for p in set_partitions(n)
        if all(contains_direction(L, indicator(n, b)) for b in p.blocks)
    ]
    out = []
    for p in hits:
        finer = any(q != p and q.refines(p) for q in hits)
        out.append(DiagonalSpecial(p, not finer))
    out.sort(key=lambda s: (-s.pattern.r, s.pattern.blocks))
    return out


def product_bound_holds(L: LinearSubvariety, pattern: EqualityPattern) -> bool:
    """Exact check of H(L1) < 3^n H(L) (squares compared)."""
    proj = project_by_pattern(L, pattern)
    if proj.L1 is Empty:
        return True
    return subspace_height(proj.L1).square < Fraction(9) ** L.ambient_dim * subspace_height(L).square


def sqrt_ball(square: Fraction, prec: int = DEFAULT_PREC) -> arb:
    with workprec(prec):
        return arb_from_fraction(square).sqrt()
