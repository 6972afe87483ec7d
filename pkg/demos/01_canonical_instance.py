"""A first solve: special points on the line z1 + z2 = 1728.

Run with ``python3 demos/01_canonical_instance.py``.
"""

from cmlinear import LinearSubvariety, discriminant_cap, solve, subspace_height

L = LinearSubvariety.from_equations([((1, 1), -1728)])
print("L:", L.equations())

# The height of L is the Euclidean norm of its primitive Plücker vector.
h = subspace_height(L)
print("H(L)^2 =", h.square, " H(L) =", h.value)

# The theorem cap is astronomically large. It certifies what a complete run would
# need, so the solver refuses to execute it and we pass a desk-sized cap.
bound = discriminant_cap(L)
print("theorem cap on |Delta| has", len(str(bound.discriminant_cap)), "digits")
print("default run exit code:", solve(L).exit_code, "(3 = refused)")

report = solve(L, 100)
print(f"\ncap 100: {report.statistics['enumerated']} tuples enumerated, "
      f"{report.statistics['certified']} certified")
for p in report.points:
    coords = ", ".join(f"j[{c['discriminant']}; {tuple(c['form'])}] = {c['value']}" for c in p["coordinates"])
    print("  ", coords)

# The diagonal z1 = z2 is itself special, so nothing on it counts.
diag = solve(LinearSubvariety.from_equations([((1, -1), 0)]), 100)
print("\nz1 = z2: diagonal specials", diag.diagonal_specials, "points outside Z^sp:", diag.points)
