"""Exact rational linear algebra and affine-linear subvarieties of A^n over Q.

Scalars are :class:`fractions.Fraction` (always in lowest terms with a
positive denominator).  Matrices are small and dense, so plain Gaussian
elimination is all that is needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import gcd, lcm
from typing import Iterable, Sequence

ExactRational = Fraction


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not accepted as exact rationals")
    return Fraction(x)


class ExactMatrix:
    """Immutable dense matrix of Fractions, stored row-major."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries: Iterable):
        entries = tuple(as_fraction(e) for e in entries)
        if len(entries) != rows * cols:
            raise ValueError(f"expected {rows * cols} entries, got {len(entries)}")
        self.rows = rows
        self.cols = cols
        self.entries = entries

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: int | None = None) -> "ExactMatrix":
        rows = [list(r) for r in rows]
        if not rows:
            return cls(0, cols or 0, ())
        ncols = len(rows[0])
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged rows")
        return cls(len(rows), ncols, [x for r in rows for x in r])

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], rows: int) -> "ExactMatrix":
        columns = [list(c) for c in columns]
        if any(len(c) != rows for c in columns):
            raise ValueError("column length mismatch")
        return cls(rows, len(columns), [columns[j][i] for i in range(rows) for j in range(len(columns))])

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls(n, n, [1 if i == j else 0 for i in range(n) for j in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "ExactMatrix":
        return cls(rows, cols, [0] * (rows * cols))

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def column(self, j: int) -> tuple:
        return tuple(self.entries[i * self.cols + j] for i in range(self.rows))

    def to_rows(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def columns(self) -> list[tuple]:
        return [self.column(j) for j in range(self.cols)]

    @property
    def T(self) -> "ExactMatrix":
        return ExactMatrix(self.cols, self.rows,
                           [self[i, j] for j in range(self.cols) for i in range(self.rows)])

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        out = []
        for i in range(self.rows):
            r = self.row(i)
            for j in range(other.cols):
                out.append(sum((r[k] * other[k, j] for k in range(self.cols)), Fraction(0)))
        return ExactMatrix(self.rows, other.cols, out)

    def apply(self, v: Sequence) -> tuple:
        if len(v) != self.cols:
            raise ValueError("shape mismatch")
        return tuple(sum((a * b for a, b in zip(self.row(i), v)), Fraction(0)) for i in range(self.rows))

    def hstack(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.rows != other.rows:
            raise ValueError("row mismatch")
        return ExactMatrix.from_rows([list(self.row(i)) + list(other.row(i)) for i in range(self.rows)],
                                     cols=self.cols + other.cols)

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> "ExactMatrix":
        return ExactMatrix(len(row_idx), len(col_idx), [self[i, j] for i in row_idx for j in col_idx])

    def __eq__(self, other):
        return (isinstance(other, ExactMatrix) and self.rows == other.rows
                and self.cols == other.cols and self.entries == other.entries)

    def __hash__(self):
        return hash((self.rows, self.cols, self.entries))

    def __repr__(self):
        body = "; ".join(" ".join(str(x) for x in self.row(i)) for i in range(self.rows))
        return f"ExactMatrix({self.rows}x{self.cols}: [{body}])"


def rref(m: ExactMatrix) -> tuple[ExactMatrix, tuple[int, ...], int]:
    """Reduced row echelon form, pivot columns and rank."""
    a = m.to_rows()
    pivots: list[int] = []
    r = 0
    for c in range(m.cols):
        piv = next((i for i in range(r, m.rows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(m.rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == m.rows:
            break
    return ExactMatrix(m.rows, m.cols, [x for row in a for x in row]), tuple(pivots), r


def rank(m: ExactMatrix) -> int:
    return rref(m)[2]


def kernel(m: ExactMatrix) -> ExactMatrix:
    """Right kernel; the columns of the result form a basis (rref-derived)."""
    red, pivots, _ = rref(m)
    free = [c for c in range(m.cols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * m.cols
        v[f] = Fraction(1)
        for i, p in enumerate(pivots):
            v[p] = -red[i, f]
        basis.append(v)
    return ExactMatrix.from_columns(basis, m.cols)


def det(m: ExactMatrix) -> Fraction:
    if m.rows != m.cols:
        raise ValueError("determinant of a non-square matrix")
    a = m.to_rows()
    n = m.rows
    sign = 1
    result = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            sign = -sign
        p = a[c][c]
        result *= p
        for i in range(c + 1, n):
            if a[i][c] != 0:
                f = a[i][c] / p
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return sign * result


def minors(m: ExactMatrix, order: int) -> dict[tuple[int, ...], Fraction]:
    """All ``order``-sized row-subset minors using the first ``order`` columns.

    For a basis matrix (n x l) with ``order == l`` these are the Grassmann
    coordinates.  Keys are 0-based row subsets in lexicographic order.
    """
    if order < 0 or order > min(m.rows, m.cols):
        raise ValueError(f"minor order {order} out of range for {m.rows}x{m.cols}")
    cols = list(range(order))
    return {I: det(m.submatrix(I, cols)) for I in combinations(range(m.rows), order)}


def primitive_integer_vector(v: Sequence) -> tuple[int, ...]:
    """Scale a nonzero rational vector to coprime integers, keeping signs."""
    v = [as_fraction(x) for x in v]
    if all(x == 0 for x in v):
        raise ValueError("zero vector has no primitive representative")
    den = lcm(*(x.denominator for x in v))
    ints = [int(x * den) for x in v]
    g = gcd(*ints)
    return tuple(x // g for x in ints)


class _Empty:
    """Marker for an empty intersection."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Empty"

    def __bool__(self):
        return False


Empty = _Empty()


@dataclass(frozen=True)
class LinearSubvariety:
    """Affine-linear subvariety ``offset + span(directions)`` of A^n over Q.

    Stored canonically: direction columns are the rows of an rref basis and
    the offset vanishes in every pivot coordinate, so equal subvarieties
    compare (and hash) equal.
    """

    ambient_dim: int
    directions: ExactMatrix
    offset: tuple

    def __post_init__(self):
        if self.ambient_dim < 1:
            raise ValueError("ambient dimension must be >= 1")
        if self.directions.rows != self.ambient_dim or len(self.offset) != self.ambient_dim:
            raise ValueError("dimension mismatch")

    @classmethod
    def from_basis(cls, directions: Sequence[Sequence], offset: Sequence) -> "LinearSubvariety":
        """Build from direction vectors (need not be independent) and a point."""
        offset = tuple(as_fraction(x) for x in offset)
        n = len(offset)
        dirs = [tuple(as_fraction(x) for x in d) for d in directions]
        if any(len(d) != n for d in dirs):
            raise ValueError("direction length does not match offset")
        if dirs:
            red, pivots, r = rref(ExactMatrix.from_rows(dirs))
            rows = [red.row(i) for i in range(r)]
        else:
            pivots, rows = (), []
        off = list(offset)
        for p, row in zip(pivots, rows):
            f = off[p]
            if f:
                off = [x - f * y for x, y in zip(off, row)]
        return cls(n, ExactMatrix.from_columns(rows, n), tuple(off))

    @classmethod
    def from_equations(cls, equations: Sequence[tuple[Sequence, object]], ambient_dim: int | None = None):
        """Solution set of ``a . z + b = 0`` for each ``(a, b)``; may be ``Empty``."""
        eqs = [(tuple(as_fraction(x) for x in a), as_fraction(b)) for a, b in equations]
        if ambient_dim is None:
            if not eqs:
                raise ValueError("ambient dimension needed when there are no equations")
            ambient_dim = len(eqs[0][0])
        n = ambient_dim
        if any(len(a) != n for a, _ in eqs):
            raise ValueError("equation length does not match ambient dimension")
        if not eqs:
            return cls.full(n)
        aug = ExactMatrix.from_rows([list(a) + [-b] for a, b in eqs])
        red, pivots, r = rref(aug)
        if n in pivots:
            return Empty
        point = [Fraction(0)] * n
        for i, p in enumerate(pivots):
            point[p] = red[i, n]
        ker = kernel(aug.submatrix(range(aug.rows), range(n)))
        return cls.from_basis(ker.columns(), point)

    @classmethod
    def full(cls, n: int) -> "LinearSubvariety":
        return cls.from_basis([[1 if i == j else 0 for i in range(n)] for j in range(n)], [0] * n)

    @classmethod
    def point(cls, p: Sequence) -> "LinearSubvariety":
        return cls.from_basis([], p)

    @property
    def dim(self) -> int:
        return self.directions.cols

    def is_full(self) -> bool:
        return self.dim == self.ambient_dim

    def direction_vectors(self) -> list[tuple]:
        return self.directions.columns()

    def at(self, params: Sequence) -> tuple:
        """Point ``offset + directions @ params``."""
        if len(params) != self.dim:
            raise ValueError("parameter count mismatch")
        step = self.directions.apply([as_fraction(t) for t in params]) if self.dim else (0,) * self.ambient_dim
        return tuple(o + s for o, s in zip(self.offset, step))

    def homogenized_basis(self) -> ExactMatrix:
        """(n+1) x (l+1) basis of the cone over the projective closure.

        Directions get a trailing 0, the offset a trailing 1.
        """
        cols = [tuple(d) + (Fraction(0),) for d in self.direction_vectors()]
        cols.append(tuple(self.offset) + (Fraction(1),))
        return ExactMatrix.from_columns(cols, self.ambient_dim + 1)

    def equations(self) -> list[tuple[tuple[int, ...], int]]:
        """Defining equations ``a . z + b = 0`` as primitive integer rows, rref order."""
        h = self.homogenized_basis()
        ann = kernel(h.T)
        if ann.cols == 0:
            return []
        red, _, r = rref(ann.T)
        out = []
        for i in range(r):
            row = primitive_integer_vector(red.row(i))
            out.append((row[:-1], row[-1]))
        return out


def _check_dims(L, n):
    if L.ambient_dim != n:
        raise ValueError(f"dimension mismatch: subvariety in A^{L.ambient_dim}, vector of length {n}")


def contains_direction(L: LinearSubvariety, v: Sequence) -> bool:
    _check_dims(L, len(v))
    v = [as_fraction(x) for x in v]
    if all(x == 0 for x in v):
        return True
    if L.dim == 0:
        return False
    m = ExactMatrix.from_rows(L.direction_vectors() + [v])
    return rank(m) == L.dim


def contains_point(L: LinearSubvariety, p: Sequence) -> bool:
    _check_dims(L, len(p))
    return contains_direction(L, [as_fraction(x) - o for x, o in zip(p, L.offset)])


def intersect(L1: LinearSubvariety, L2: LinearSubvariety):
    """Exact affine intersection, or ``Empty``."""
    if L1.ambient_dim != L2.ambient_dim:
        raise ValueError("dimension mismatch")
    eqs = L1.equations() + L2.equations()
    return LinearSubvariety.from_equations(eqs, ambient_dim=L1.ambient_dim)
