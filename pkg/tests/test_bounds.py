import math
from fractions import Fraction

import pytest
from flint import arb

from cmlinear import bounds
from cmlinear.balls import workprec
from cmlinear.exact_linear import LinearSubvariety


def test_theorem_constants_are_exact():
    c1, c2 = bounds.theorem_constants(1, 1)
    assert c1 == 480 * 64 and c2 == Fraction(14 * 10**10) * 21000 * 2**10
    assert bounds.theorem_constants(2, 1)[0] == 7864320
    assert bounds.scientific(c2) == "3.01056e18"
    assert bounds.format_decimal(Fraction(3, 8)) == "0.375"
    assert bounds.format_decimal(Fraction(1, 3)) == "1/3"
    with pytest.raises(ValueError):
        bounds.theorem_constants(0)


def test_degree_scaling():
    c1, c2 = bounds.theorem_constants(2, 1)
    d1, d2 = bounds.theorem_constants(2, 3)
    assert d1 == 27 * c1 and d2 == 81 * c2


def test_discriminant_cap_of_a_hyperplane():
    L = LinearSubvariety.from_equations([((1, 1), -1728)])
    rep = bounds.discriminant_cap(L)
    c1, c2 = bounds.theorem_constants(2)
    expect = (c1 * math.log(math.sqrt(2 + 1728**2)) + float(c2)) ** 2
    assert abs(rep.discriminant_cap / expect - 1) < 1e-12
    with workprec(400):
        square = rep.sqrt_cap * rep.sqrt_cap
        assert square.upper() <= rep.discriminant_cap < square.upper() + 1
    with pytest.raises(ValueError):
        bounds.discriminant_cap(LinearSubvariety.full(2))


def test_lemma_constants():
    c = bounds.lemma_c1(2, arb(0), arb(0))
    assert c.general.overlaps(arb(13 * 10**10) * 21000**2 * 3**14)
    assert c.same_field.overlaps(arb(21 * 8 * 64))
    log2 = arb(2).log()
    c = bounds.lemma_c1(1, log2, log2, log_H=arb(10).log())
    assert c.general > bounds.lemma_c1(1, log2, log2).general
    assert bounds.lemma_c2(1, 0).overlaps(arb(218 * 64))


def test_intermediate_bounds_are_dominated_by_the_step_majorant():
    for k in (1, 2, 3):
        for h0 in (0, 1, 5):
            for hb in (0, 2):
                m = bounds.step_majorant(k, h0, hb)
                for f in (bounds.same_discriminant_bound, bounds.separated_conductor_bound):
                    assert f(k, h0, hb) <= m
                assert bounds.automorphism_count_bound(k, h0) <= m


def test_log_plus():
    assert bounds.log_plus(Fraction(1, 2)) == 0
    assert bounds.log_plus(-8).overlaps(arb(8).log())
