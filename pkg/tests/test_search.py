from fractions import Fraction

import pytest

from cmlinear.balls import PrecisionError
from cmlinear.exact_linear import LinearSubvariety
from cmlinear.modular_eval import singular_modulus, singular_moduli_of
from cmlinear.search import (
    SolveReport,
    Status,
    certify_with_escalation,
    certify_zero,
    degree_bound,
    enumerate_singular_moduli,
    point_on,
    solve,
    verify_lemma31,
)

from oracles import brute_force_special_points, brute_reduced_forms


def keys(delta):
    return [m.key for m in singular_moduli_of(delta)]


def test_enumeration_order_and_count():
    ms = enumerate_singular_moduli(23)
    assert [m.discriminant for m in ms][:4] == [-3, -4, -7, -8]
    assert len(ms) == sum(len(brute_reduced_forms(-D)) for D in range(3, 24) if D % 4 in (0, 3)) == 15
    with pytest.raises(ValueError):
        enumerate_singular_moduli(2)


def test_degree_bound():
    a, b = singular_moduli_of(-15)
    assert degree_bound([a]) == 2 and degree_bound([a, b]) == 4
    x, y, z = singular_moduli_of(-23)
    assert degree_bound([x, y, z]) == 6
    assert degree_bound([x, a]) == 6


def test_certify_simple_identities():
    j3, j4 = singular_modulus(-3), singular_modulus(-4)
    assert certify_zero([1, 1], -1728, [j3, j4]).status is Status.ZERO
    assert certify_zero([1, 1], -1727, [j3, j4]).status is Status.NONZERO
    assert certify_zero([1, -1], 0, [j4, j4]).status is Status.ZERO


def test_conjugate_sums_need_escalation():
    a, b = singular_moduli_of(-15)
    cert = certify_with_escalation([1, 1], 191025, [a, b])
    assert cert.status is Status.ZERO
    assert certify_with_escalation([1, 1], 191024, [a, b]).status is Status.NONZERO
    x, y, z = singular_moduli_of(-23)
    assert certify_with_escalation([1, 1, 1], 3491750, [x, y, z]).status is Status.ZERO


def test_point_on():
    L = LinearSubvariety.from_equations([((1, 1), -1728)])
    assert point_on(L, [singular_modulus(-3), singular_modulus(-4)])
    assert not point_on(L, [singular_modulus(-3), singular_modulus(-7)])
    assert point_on(L, [Fraction(1000), Fraction(728)])


def test_canonical_hyperplane():
    rep = solve(LinearSubvariety.from_equations([((1, 1), -1728)]), 100)
    assert rep.point_keys() == {((-3, 1, 1, 1), (-4, 1, 0, 1)), ((-4, 1, 0, 1), (-3, 1, 1, 1))}
    assert rep.exit_code == 0 and rep.cap["source"] == "user"


@pytest.mark.parametrize("equations,cap", [
    ([((1, 1), 191025)], 40),                       # conjugates of discriminant -15
    ([((1, 1, 1), 3491750)], 24),                   # the three moduli of -23
    ([((1, 1, -2), 0)], 28),                        # contains the full diagonal line
    ([((1, -1, 0), 0), ((0, 0, 1), -1728)], 40),    # a special line
    ([((1, 1, 0), -1728)], 20),                     # z3 free
])
def test_planted_instances_against_brute_force(equations, cap):
    L = LinearSubvariety.from_equations(equations)
    ref = brute_force_special_points(L, enumerate_singular_moduli(cap))
    rep = solve(L, cap)
    assert rep.point_keys() == ref
    assert solve(L, cap, prune=False).point_keys() == ref
    assert rep.complete


def test_planted_conjugates_are_found():
    a, b = keys(-15)
    rep = solve(LinearSubvariety.from_equations([((1, 1), 191025)]), 40)
    assert {(a, b), (b, a)} <= rep.point_keys()
    rep = solve(LinearSubvariety.from_equations([((1, 1, 1), 3491750)]), 24)
    assert len(rep.point_keys()) == 6


def test_special_line_has_no_isolated_points():
    L = LinearSubvariety.from_equations([((1, -1, 0), 0), ((0, 0, 1), -1728)])
    rep = solve(L, 40)
    assert rep.points == [] and rep.special_patterns


def test_refusal_and_undecided():
    L = LinearSubvariety.from_equations([((1, 1), -1728)])
    rep = solve(L)
    assert rep.refused and rep.exit_code == 3 and rep.points == []
    L = LinearSubvariety.from_equations([((1, 1), 191025)])
    rep = solve(L, 20, max_precision=8)
    assert rep.undecided and not rep.complete and rep.exit_code == 2


def test_report_round_trip():
    rep = solve(LinearSubvariety.from_equations([((2, 3), -3 * 1728)]), 30)
    text = rep.to_json()
    assert SolveReport.from_json(text).to_json() == text
    assert text.endswith("\n")
    with pytest.raises(ValueError):
        SolveReport.from_dict({**rep.to_dict(), "format": 99})


def test_solve_validation():
    with pytest.raises(ValueError):
        solve(LinearSubvariety.full(2), 10)
    with pytest.raises(ValueError):
        solve(LinearSubvariety.from_equations([((1, 1), 0)]), 2)


def test_verify_lemma():
    rep = verify_lemma31([1, 1], -1728, 60)
    assert rep.holds and len(rep.solutions) == 2
    rep = verify_lemma31([1, -1], 0, 30)
    assert rep.solutions == () and rep.holds
    with pytest.raises(ValueError):
        verify_lemma31([1, 0], 1, 10)


def test_point_on_raises_when_undecidable(monkeypatch):
    import cmlinear.search as search

    def stuck(*args, **kwargs):
        raise search.Undecided("forced")

    monkeypatch.setattr(search, "certify_with_escalation", stuck)
    with pytest.raises(PrecisionError):
        point_on(LinearSubvariety.from_equations([((1, 1), -1728)]),
                 [singular_modulus(-3), singular_modulus(-4)])


def test_small_enumerations():
    ms = enumerate_singular_moduli(4)
    assert [m.key for m in ms] == [(-3, 1, 1, 1), (-4, 1, 0, 1)]
    assert ms[0].value.real.contains(0) and ms[1].value.real.contains(1728)
    assert len(enumerate_singular_moduli(16)) == 9


def test_single_modulus_nonzero():
    assert certify_zero([1], -1, [singular_modulus(-4)]).status is Status.NONZERO


def test_fixed_special_coordinate_gives_no_points():
    rep = solve(LinearSubvariety.from_equations([((1, 0), -1728)]), 60)
    assert rep.points == [] and rep.complete


def test_point_subvariety_off_the_moduli():
    L = LinearSubvariety.from_equations([((1, 1), -1728), ((1, -1), 0)])
    assert L.dim == 0
    assert solve(L, 100).points == []


def test_one_variable_lemma_case():
    rep = verify_lemma31([1], 0, 100)
    assert [tuple(m.key for m in s.moduli) for s in rep.solutions] == [((-3, 1, 1, 1),)]
    rep = verify_lemma31([1, 1], -1728, 100)
    assert len(rep.solutions) == 2 and all(s.margin > 1e17 for s in rep.solutions)


def test_reported_points_survive_resubstitution_at_higher_precision():
    cases = [([((1, 1), 191025)], 40), ([((1, 1, 1), 3491750)], 24), ([((1, 1), -1728)], 60)]
    for eqs, cap in cases:
        L = LinearSubvariety.from_equations(eqs)
        rep = solve(L, cap)
        assert rep.points
        for cand in rep.candidates():
            sharper = [singular_modulus(m.discriminant, m.form, m.radius ** 4) for m in cand.coordinates]
            for a, b in L.equations():
                cert = certify_zero(a, b, sharper)
                assert cert.status is Status.ZERO or cert.status is Status.NEEDS_PRECISION
                assert certify_with_escalation(a, b, sharper).status is Status.ZERO
