from fractions import Fraction

import pytest
import sympy
from flint import arb

from cmlinear.quadratic import (
    ReducedForm,
    class_number,
    classify_discriminant,
    discriminants_up_to,
    factorize,
    is_fundamental,
    kronecker,
    psi,
    rcf_degree_lower_bound,
    rcf_degree_ratio,
    reduced_forms,
    siegel_tatuzawa_floor,
    two_rank,
    two_rank_bound,
)

from oracles import brute_reduced_forms


def test_classification():
    d = classify_discriminant(-12)
    assert (d.value, d.fundamental_part, d.conductor) == (-12, -3, 2)
    d = classify_discriminant(-400)
    assert (d.fundamental_part, d.conductor) == (-4, 10)
    for bad in (0, 5, -1, -2, -5):
        with pytest.raises(ValueError):
            classify_discriminant(bad)


def test_fundamental_discriminants_match_sympy():
    for D in range(3, 400):
        d = -D
        if d % 4 not in (0, 1):
            continue
        m = d // 4 if d % 4 == 0 else d
        ok = (d % 4 == 1 and sympy.ntheory.factor_.core(-d) == -d) or (
            d % 4 == 0 and m % 4 in (2, 3) and sympy.ntheory.factor_.core(-m) == -m)
        assert is_fundamental(d) == ok, d


def test_reduced_forms_against_integer_scan():
    for delta in discriminants_up_to(600):
        assert [tuple(f) for f in reduced_forms(delta)] == brute_reduced_forms(delta)


def test_non_primitive_forms_are_excluded():
    assert [tuple(f) for f in reduced_forms(-12)] == [(1, 0, 3)]
    assert class_number(-16) == 1
    assert ReducedForm(2, 2, 2).is_reduced()


def test_factorize_and_psi():
    assert factorize(360) == {2: 3, 3: 2, 5: 1}
    assert [psi(n) for n in (1, 2, 6, 12)] == [1, 3, 12, 24]


def test_kronecker_matches_sympy_jacobi():
    for d in (-3, -4, -7, -8, -15, -20, -23):
        for n in range(1, 80, 2):
            assert kronecker(d, n) == sympy.jacobi_symbol(d % n if n > 1 else 0, n) or n == 1


def test_rcf_ratio_is_the_class_number_ratio():
    for d in (-3, -4, -7, -8, -15, -20):
        for f in range(1, 6):
            for c in range(1, 6):
                expect = Fraction(class_number(c * c * f * f * d), class_number(f * f * d))
                assert rcf_degree_ratio(d, f, c) == expect


def test_rcf_lower_bound_and_errors():
    assert rcf_degree_lower_bound(6).overlaps(arb(0.5))
    with pytest.raises(ValueError):
        rcf_degree_ratio(-12, 1, 2)


def test_two_rank_genus_count():
    # 2^(mu - 1) ambiguous classes, mu = number of prime factors for odd squarefree |d|
    assert two_rank(-3) == 0
    assert two_rank(-15) == 1
    assert two_rank(-420) == 3
    b = two_rank_bound(-420, 2)
    assert b.bound > 3 and b.stirling_form <= b.bound


def test_siegel_tatuzawa_floor_value():
    v = siegel_tatuzawa_floor(-10000)
    assert 0.0343 < float(v.mid()) < 0.0344
