"""Galois conjugates and why certification sometimes needs more digits.

The two moduli of discriminant -15 are real conjugates whose sum is minus
the X coefficient of the class polynomial. Their sum is rational, but each
summand is a quadratic irrational of size about 1.9e5, so the Liouville gap
is tiny and the default 1e-20 balls cannot decide the zero test at once.
"""

from cmlinear import LinearSubvariety, class_polynomial, solve
from cmlinear.modular_eval import singular_moduli_of
from cmlinear.search import certify_with_escalation, certify_zero

H = class_polynomial(-15)
print("H_-15 =", H)
a, b = singular_moduli_of(-15)
trace = -H.coefficients[1]
print("j1 =", a.value.real.str(25), "\nj2 =", b.value.real.str(25))

first = certify_zero([1, 1], -trace, [a, b])
print("\nfirst attempt:", first.status.value, "log gap", first.log_gap.str(8),
      "wanted radius 2^-%d" % first.wanted_radius.denominator.bit_length())
final = certify_with_escalation([1, 1], -trace, [a, b])
print("after escalation:", final.status.value)

report = solve(LinearSubvariety.from_equations([((1, 1), -trace)]), 40)
print("\nsolutions of z1 + z2 =", trace, "with |Delta| <= 40:")
for p in report.points:
    print("  ", [(c["discriminant"], tuple(c["form"])) for c in p["coordinates"]])

# The three moduli of discriminant -23 (one real, two complex) sum to -3491750.
report = solve(LinearSubvariety.from_equations([((1, 1, 1), 3491750)]), 24)
print("\nz1 + z2 + z3 = -3491750 has", len(report.points), "solutions (the orderings of one triple)")
