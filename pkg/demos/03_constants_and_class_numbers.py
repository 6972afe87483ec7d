"""Explicit constants and the class-number facts behind them."""

from flint import arb

from cmlinear import bounds, quadratic
from cmlinear.search import verify_lemma31

for n in (1, 2, 3):
    c1, c2 = bounds.theorem_constants(n)
    print(f"n = {n}: c1 = {c1}, c2 = {bounds.scientific(c2)}")

# Empirical check of the constant for one linear equation in distinct moduli.
rep = verify_lemma31([1, 1], -1728, 200)
print("\nz1 + z2 = 1728 in distinct moduli, cap 200:")
for s in rep.solutions:
    print("  max |Delta|^(1/2) =", s.sqrt_disc.str(6), " margin to c1:", s.margin.str(6))

# Ring class field degrees agree with class-number ratios.
print("\n[K[c]:K] versus h(c^2 d)/h(d) for d = -7:")
for c in range(1, 8):
    r = quadratic.rcf_degree_ratio(-7, 1, c)
    print(f"  c = {c}: {r}  (h = {quadratic.class_number(-7 * c * c)})")

# The effective class-number floor, outside the possible exceptional field.
worst = min(
    (quadratic.class_number(d) / float(quadratic.siegel_tatuzawa_floor(d).mid()), d)
    for d in quadratic.discriminants_up_to(10_000)
)
print(f"\nsmallest h(D) / floor(D) for |D| <= 10^4: {worst[0]:.1f} at D = {worst[1]}")
