from fractions import Fraction

import pytest
from flint import arb
from hypothesis import given, settings, strategies as st

from cmlinear.exact_linear import LinearSubvariety
from cmlinear.heights import (
    HeightValue,
    affine_height,
    liouville_gap,
    log_liouville_gap,
    projective_height_l2,
    projective_height_sup,
    rational_height,
    reduce_to_hyperplane,
    subspace_height,
)

rationals = st.fractions(min_value=-40, max_value=40, max_denominator=12)


def test_rational_and_affine_heights():
    assert rational_height(Fraction(-7, 3)) == 7
    assert affine_height([Fraction(1, 2), Fraction(1, 3)]).square == 36
    assert projective_height_sup([2, 4, -6]).square == 9
    assert projective_height_l2([2, 4, -6]).square == 14


def test_hyperplane_height_is_the_l2_norm():
    L = LinearSubvariety.from_equations([((1, 1), -1728)])
    assert subspace_height(L).square == 1 + 1 + 1728**2


def test_point_height_matches_projective_l2():
    L = LinearSubvariety.point((Fraction(1, 2), 3))
    assert subspace_height(L).square == projective_height_l2([1, Fraction(1, 2), 3]).square


def test_zero_vector_refused():
    with pytest.raises(ValueError):
        projective_height_sup([0, 0])


@settings(max_examples=100, deadline=None)
@given(st.lists(rationals, min_size=1, max_size=4), st.lists(rationals, min_size=1, max_size=4))
def test_sum_height_inequality(p, q):
    n = min(len(p), len(q))
    p, q = p[:n], q[:n]
    s = affine_height([x + y for x, y in zip(p, q)])
    assert s.square <= 4 * affine_height(p).square * affine_height(q).square


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 4).flatmap(lambda n: st.tuples(
    st.lists(st.lists(rationals, min_size=n, max_size=n), min_size=0, max_size=n - 1),
    st.lists(rationals, min_size=n, max_size=n))))
def test_reduced_hyperplane_contains_L_and_is_not_higher(data):
    dirs, off = data
    L = LinearSubvariety.from_basis(dirs, off)
    if L.is_full():
        return
    a, b = reduce_to_hyperplane(L)
    assert any(a)
    for d in L.direction_vectors():
        assert sum(x * y for x, y in zip(a, d)) == 0
    assert sum(x * y for x, y in zip(a, L.offset)) + b == 0
    assert projective_height_sup(list(a) + [b]).square <= subspace_height(L).square


def test_height_value_comparisons_are_exact():
    a, b = HeightValue.from_square(2), HeightValue.from_square(Fraction(8, 4))
    assert a <= b and not a < b
    assert HeightValue.from_square(9).is_integer()
    assert a.scaled_square_le(HeightValue.from_square(1), Fraction(3, 2))


def test_liouville_gap():
    eps = liouville_gap(10, 3)
    assert eps.rad() == 0
    assert float(eps.mid()) <= 1e-3 * (1 + 1e-15) and eps > arb("0.99e-3")
    assert liouville_gap(1, 5) == 1
    log_eps = log_liouville_gap(arb(10).log(), 2)
    assert abs(float(log_eps.mid()) + 2 * 2.302585092994046) < 1e-12
    with pytest.raises(ValueError):
        liouville_gap(10, 0)
