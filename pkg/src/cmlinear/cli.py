"""Command-line entry point.

Exit codes: 0 success (for ``solve``: complete), 1 input or usage error,
2 undecided tuples present, 3 cap refusal.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction
from typing import Sequence

from flint import acb, arb, fmpq

from . import bounds, heights, modular_eval, quadratic, search
from .balls import DEFAULT_PREC, PrecisionError, workprec
from .exact_linear import Empty, LinearSubvariety
from .special_geometry import EqualityPattern, in_positive_dim_special

JOB_FORMAT = 1
EXIT_OK, EXIT_INPUT, EXIT_UNDECIDED, EXIT_REFUSED = 0, 1, 2, 3


class InputError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None, source: str = "<job>"):
        where = f"{source}:{line}:{column}: " if line is not None else f"{source}: "
        super().__init__(where + message)
        self.line, self.column = line, column


# ---------------------------------------------------------------------------
# job files


def parse_rational(x, what: str = "value") -> Fraction:
    """Exact rational from a "p/q" or decimal string, or an integer. Floats are refused."""
    if isinstance(x, bool):
        raise ValueError(f"{what}: booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"{what}: cannot parse {x!r} as a rational") from None
    raise ValueError(f"{what}: rationals must be strings such as \"3/4\" (got {type(x).__name__})")


def _locate(text: str, key: str) -> tuple[int | None, int | None]:
    pos = text.find(f'"{key}"')
    if pos < 0:
        return None, None
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


class JobSpec:
    """A parsed job file."""

    def __init__(self, subvariety, ambient_dim: int, cap: int | None, degree: int,
                 threads: int | None, max_precision: int | None):
        self.subvariety = subvariety
        self.ambient_dim = ambient_dim
        self.cap = cap
        self.degree = degree
        self.threads = threads
        self.max_precision = max_precision


def parse_job(text: str, source: str = "<job>") -> JobSpec:
    """Parse a "format": 1 job document.

    Either ``equations`` (list of {"a": [...], "b": ...}) or ``basis``
    ({"directions": [[...], ...], "offset": [...]}) must be present.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(exc.msg, exc.lineno, exc.colno, source) from None

    def fail(msg, key):
        line, col = _locate(text, key) if key else (None, None)
        raise InputError(msg, line, col, source)

    if not isinstance(data, dict):
        raise InputError("the job must be a JSON object", 1, 1, source)
    if data.get("format") != JOB_FORMAT:
        fail(f"unsupported or missing \"format\" (expected {JOB_FORMAT})", "format" if "format" in data else None)
    known = {"format", "ambient_dim", "equations", "basis", "cap", "degree", "threads", "max_precision"}
    for k in data:
        if k not in known:
            fail(f"unknown field {k!r}", k)
    has_eq, has_basis = "equations" in data, "basis" in data
    if has_eq == has_basis:
        fail("exactly one of \"equations\" and \"basis\" is required", "equations" if has_eq else None)
    n = data.get("ambient_dim")
    if n is not None and (not isinstance(n, int) or isinstance(n, bool) or n < 1):
        fail("\"ambient_dim\" must be a positive integer", "ambient_dim")
    try:
        if has_eq:
            eqs = data["equations"]
            if not isinstance(eqs, list):
                fail("\"equations\" must be a list", "equations")
            parsed = []
            for i, e in enumerate(eqs):
                if not isinstance(e, dict) or set(e) != {"a", "b"} or not isinstance(e["a"], list):
                    fail(f"equation {i + 1} must be an object with fields \"a\" (list) and \"b\"", "equations")
                a = [parse_rational(x, f"equation {i + 1} coefficient") for x in e["a"]]
                parsed.append((a, parse_rational(e["b"], f"equation {i + 1} constant")))
            if n is None:
                if not parsed:
                    fail("\"ambient_dim\" is required when there are no equations", "equations")
                n = len(parsed[0][0])
            if any(len(a) != n for a, _ in parsed):
                fail(f"every coefficient vector must have length {n}", "equations")
            if any(all(x == 0 for x in a) for a, _ in parsed):
                fail("an equation has all coefficients zero", "equations")
            L = LinearSubvariety.from_equations(parsed, n)
        else:
            basis = data["basis"]
            if not isinstance(basis, dict) or set(basis) != {"directions", "offset"}:
                fail("\"basis\" must have fields \"directions\" and \"offset\"", "basis")
            off = [parse_rational(x, "offset") for x in basis["offset"]]
            if n is None:
                n = len(off)
            dirs = [[parse_rational(x, "direction") for x in d] for d in basis["directions"]]
            if len(off) != n or any(len(d) != n for d in dirs):
                fail(f"basis vectors must have length {n}", "basis")
            L = LinearSubvariety.from_basis(dirs, off)
    except ValueError as exc:
        if isinstance(exc, InputError):
            raise
        fail(str(exc), "equations" if has_eq else "basis")

    def opt_int(key, minimum):
        v = data.get(key)
        if v is None:
            return None
        if not isinstance(v, int) or isinstance(v, bool) or v < minimum:
            fail(f"\"{key}\" must be an integer >= {minimum}", key)
        return v

    cap = opt_int("cap", 3)
    degree = opt_int("degree", 1) or 1
    return JobSpec(L, n, cap, degree, opt_int("threads", 1), opt_int("max_precision", 64))


def read_job(path: str) -> JobSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(str(exc), source=path) from None
    return parse_job(text, path)


# ---------------------------------------------------------------------------
# output helpers


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    else:
        sys.stdout.write(text.rstrip("\n") + "\n")


def _ball(x: arb, digits: int = 25) -> str:
    return x.str(digits, radius=True)


def _cball(z: acb, digits: int = 25) -> str:
    return search._cstr(z, digits)


def _frac(x) -> str:
    return search._frac_str(x)


def _subvariety_text(L) -> str:
    if L is Empty:
        return "empty"
    lines = []
    for a, b in L.equations():
        lines.append("  " + " + ".join(f"({x})*z{i + 1}" for i, x in enumerate(a) if x) + f" + ({b}) = 0")
    return "\n".join(lines) if lines else "  (all of A^n)"


def _disc(s: str) -> int:
    try:
        return int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{s!r} is not an integer") from None


def _form(s: str):
    try:
        a, b, c = (int(x) for x in s.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"form must be a,b,c (got {s!r})") from None
    return quadratic.ReducedForm(a, b, c)


def parse_point(spec: str) -> list[modular_eval.SingularModulus]:
    """Coordinates "D:a,b,c;D:a,b,c;..." (the form may be omitted for tau_D)."""
    out = []
    for part in spec.split(";"):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            d, f = part.split(":", 1)
            form = _form(f)
        else:
            d, form = part, None
        delta = _disc(d)
        if form is not None and not form.is_reduced():
            raise ValueError(f"{form} is not a reduced form")
        out.append(modular_eval.singular_modulus(delta, form))
    return out


# ---------------------------------------------------------------------------
# subcommands


def cmd_height(args) -> int:
    job = read_job(args.job)
    h = heights.subspace_height(job.subvariety)
    _emit(args, {"square": _frac(h.square), "height": _ball(h.value), "log_height": _ball(h.log_value)},
          f"H(L) = {_ball(h.value)}\nlog H(L) = {_ball(h.log_value)}\nH(L)^2 = {_frac(h.square)} (exact)")
    return EXIT_OK


def cmd_bound(args) -> int:
    job = read_job(args.job)
    r = bounds.discriminant_cap(job.subvariety, job.degree)
    payload = {
        "n": r.n, "degree": r.degree, "log_height": _ball(r.log_height),
        "c1": str(r.c1), "c2": _frac(r.c2), "sqrt_cap": _ball(r.sqrt_cap),
        "discriminant_cap": str(r.discriminant_cap),
    }
    text = "\n".join([
        f"n = {r.n}, degree = {r.degree}",
        f"log H(L) = {_ball(r.log_height)}",
        f"c1 = {r.c1} (exact)",
        f"c2 = {bounds.format_decimal(r.c2)} (exact, ~{bounds.scientific(r.c2)})",
        f"c1 log H(L) + c2 = {_ball(r.sqrt_cap)}",
        f"discriminant cap = {r.discriminant_cap} (exact integer, ~{bounds.scientific(Fraction(r.discriminant_cap))})",
    ])
    _emit(args, payload, text)
    return EXIT_OK


def cmd_class_number(args) -> int:
    h = quadratic.class_number(args.delta)
    _emit(args, {"discriminant": args.delta, "class_number": h}, str(h))
    return EXIT_OK


def cmd_class_poly(args) -> int:
    p = modular_eval.class_polynomial(args.delta, cache=args.cache_dir)
    _emit(args, {"discriminant": args.delta, "degree": p.degree,
                 "coefficients": [str(c) for c in p.coefficients]}, str(p))
    return EXIT_OK


def cmd_reduce_forms(args) -> int:
    forms = quadratic.reduced_forms(args.delta)
    _emit(args, {"discriminant": args.delta, "forms": [list(f) for f in forms]},
          "\n".join(str(f) for f in forms))
    return EXIT_OK


def cmd_j_eval(args) -> int:
    radius = Fraction(1, 10**args.digits)
    m = modular_eval.singular_modulus(args.delta, args.form, radius)
    mag = abs(m.value).upper()
    digits = args.digits + 3 + max(0, math.ceil(float(mag.log()) / math.log(10)) if mag > 1 else 0)
    _emit(args, {"discriminant": m.discriminant, "form": list(m.form), "value": _cball(m.value, digits),
                 "precision_bits": m.precision_bits},
          f"j{m.form} = {_cball(m.value, digits)}")
    return EXIT_OK


def cmd_reduce_tau(args) -> int:
    re, im = parse_rational(args.re, "re"), parse_rational(args.im, "im")
    if im <= 0:
        raise InputError("Im(tau) must be positive")
    with workprec(DEFAULT_PREC):
        tau = acb(arb(fmpq(re.numerator, re.denominator)), arb(fmpq(im.numerator, im.denominator)))
        red, gamma = modular_eval.reduce_to_fundamental(tau)
    _emit(args, {"tau": _cball(red), "transform": [list(r) for r in gamma]},
          f"tau' = {_cball(red)}\ngamma = {gamma}")
    return EXIT_OK


def cmd_psi(args) -> int:
    v = quadratic.psi(args.N)
    _emit(args, {"N": args.N, "psi": v}, str(v))
    return EXIT_OK


def cmd_rcf_degree(args) -> int:
    v = quadratic.rcf_degree_ratio(args.d, args.f, args.c)
    lb = quadratic.rcf_degree_lower_bound(args.c)
    _emit(args, {"ratio": _frac(v), "lower_bound": _ball(lb)},
          f"[K[cf]:K[f]] = {_frac(v)} (exact)\nlower bound sqrt(6)/12 sqrt(c) = {_ball(lb)}")
    return EXIT_OK


def cmd_two_rank(args) -> int:
    r = quadratic.two_rank(args.delta)
    _emit(args, {"discriminant": args.delta, "two_rank": r}, str(r))
    return EXIT_OK


def cmd_solve(args) -> int:
    job = read_job(args.job)
    cap = args.cap if args.cap is not None else job.cap
    threads = args.threads or job.threads
    report = search.solve(job.subvariety, cap, job.degree, threads=threads,
                          refusal_threshold=args.refusal_threshold, max_precision=job.max_precision)
    if args.json:
        sys.stdout.write(report.to_json())
    else:
        sys.stdout.write(_solve_text(report))
    return report.exit_code


def _solve_text(rep: search.SolveReport) -> str:
    cap = rep.cap
    lines = [
        f"H(L) = {rep.height['value']}",
        f"theorem discriminant cap = {rep.bound['discriminant_cap']}",
        f"effective cap = {cap['effective']} (from {cap['source']})",
    ]
    if rep.refused:
        lines.append(f"refused: effective cap exceeds the threshold {cap['refusal_threshold']}")
        return "\n".join(lines) + "\n"
    for d in rep.diagonal_specials:
        pat = EqualityPattern.from_json(d["pattern"])
        lines.append(f"special diagonal in L: {pat}" + (" (maximal)" if d["maximal"] else ""))
    lines.append(f"special points outside Z^sp: {len(rep.points)}")
    for p in rep.points:
        coords = ", ".join(f"j[{c['discriminant']};({','.join(map(str, c['form']))})] = {c['value']}"
                           for c in p["coordinates"])
        lines.append(f"  ({coords})  residual <= {p['residual_bound']}")
    if rep.undecided:
        lines.append(f"undecided tuples: {len(rep.undecided)}")
    lines.append("statistics: " + ", ".join(f"{k}={v}" for k, v in rep.statistics.items()))
    lines.append("complete" if rep.complete else "INCOMPLETE")
    return "\n".join(lines) + "\n"


def cmd_check_point(args) -> int:
    job = read_job(args.job)
    try:
        point = parse_point(args.point)
    except ValueError as exc:
        raise InputError(str(exc), source="--point") from None
    L = job.subvariety
    if len(point) != job.ambient_dim:
        raise InputError(f"point has {len(point)} coordinates, L lives in A^{job.ambient_dim}", source="--point")
    on = search.point_on(L, point)
    special = in_positive_dim_special(L, point, check_membership=False) if on else None
    payload = {"on_L": on, "in_positive_dimensional_special": special,
               "coordinates": [search._modulus_json(m) for m in point]}
    text = f"on L: {on}"
    if on:
        text += f"\ninside a positive-dimensional special subvariety of L: {special}"
    _emit(args, payload, text)
    return EXIT_OK


def cmd_verify_lemma(args) -> int:
    if len(args.coefficients) < 2:
        raise InputError("need at least one coefficient a_i and the constant b", source="arguments")
    vals = [parse_rational(x, "coefficient") for x in args.coefficients]
    rep = search.verify_lemma31(vals[:-1], vals[-1], args.cap, threads=args.threads)
    d = rep.to_dict()
    lines = [f"c1 = {d['c1']}", f"solutions under cap {args.cap}: {len(rep.solutions)}"]
    for s in d["solutions"]:
        coords = ", ".join(f"j[{c['discriminant']};({','.join(map(str, c['form']))})]" for c in s["coordinates"])
        lines.append(f"  ({coords})  max |Delta|^(1/2) = {s['max_sqrt_abs_discriminant']}, margin {s['margin']}")
    lines.append(f"violations: {rep.violations}")
    _emit(args, d, "\n".join(lines))
    if rep.undecided:
        return EXIT_UNDECIDED
    return EXIT_OK


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_INPUT)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
    common.add_argument("--cache-dir", default=None,
                        help=f"class-polynomial cache (default: ${modular_eval.CACHE_ENV})")

    p = _Parser(prog="cmlinear", description="Special points on linear subvarieties of A^n.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    add("height", cmd_height, "height of L").add_argument("job")
    add("bound", cmd_bound, "theorem constants and discriminant cap").add_argument("job")
    for name, func in (("class-number", cmd_class_number), ("class-poly", cmd_class_poly),
                       ("reduce-forms", cmd_reduce_forms), ("two-rank", cmd_two_rank)):
        add(name, func, name.replace("-", " ")).add_argument("delta", type=_disc)
    sp = add("j-eval", cmd_j_eval, "certified singular modulus")
    sp.add_argument("delta", type=_disc)
    sp.add_argument("--form", type=_form, default=None)
    sp.add_argument("--digits", type=int, default=20)
    sp = add("reduce-tau", cmd_reduce_tau, "reduce tau into the fundamental domain")
    sp.add_argument("re")
    sp.add_argument("im")
    add("psi", cmd_psi, "degree of the modular polynomial").add_argument("N", type=int)
    sp = add("rcf-degree", cmd_rcf_degree, "[K[cf]:K[f]]")
    for k in ("d", "f", "c"):
        sp.add_argument(k, type=int)
    sp = add("solve", cmd_solve, "certified special points on L")
    sp.add_argument("job")
    sp.add_argument("--cap", type=int, default=None)
    sp.add_argument("--refusal-threshold", type=int, default=search.REFUSAL_THRESHOLD)
    sp = add("check-point", cmd_check_point, "membership and Z^sp status of a special point")
    sp.add_argument("job")
    sp.add_argument("--point", required=True, help='e.g. --point="-3:1,1,1;-4:1,0,1" (use = when it starts with a minus sign)')
    sp = add("verify-lemma", cmd_verify_lemma, "solutions of sum a_i j_i + b = 0 in distinct moduli")
    sp.add_argument("coefficients", nargs="+", help="a_1 ... a_k b")
    sp.add_argument("--cap", type=int, required=True)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.cache_dir:
        os.environ[modular_eval.CACHE_ENV] = args.cache_dir
    try:
        return args.func(args)
    except InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except PrecisionError as exc:
        sys.stderr.write(f"precision exhausted: {exc}\n")
        return EXIT_UNDECIDED
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
