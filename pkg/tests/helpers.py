"""Independent reference computations used by several test modules.

Nothing here calls into the solvers: feasibility of a single variable is
decided by direct interval reasoning, Farkas sums are recomputed by hand, and
random relations are built so that a known rank exists.
"""
from __future__ import annotations

import random
from fractions import Fraction

from horn_forge.formula import EQ, GE, GT, LinConstraint, LinTerm


def holds(c: LinConstraint, env) -> bool:
    value = c.term.constant + sum(k * Fraction(env[v]) for v, k in c.term.coeffs)
    return value == 0 if c.rel == EQ else value >= 0 if c.rel == GE else value > 0


def interval_feasible(cube, var: str, env) -> bool:
    """Is there a rational value of ``var`` satisfying ``cube`` given ``env`` for the rest?"""
    lo, lo_strict, hi, hi_strict = None, False, None, False
    for c in cube:
        a = Fraction(dict(c.term.coeffs).get(var, 0))
        rest = c.term.constant + sum(k * Fraction(env[v]) for v, k in c.term.coeffs if v != var)
        if a == 0:
            if not (rest == 0 if c.rel == EQ else rest >= 0 if c.rel == GE else rest > 0):
                return False
            continue
        bound = -rest / a
        strict = c.rel == GT
        kinds = ("lo", "hi") if c.rel == EQ else (("lo",) if a > 0 else ("hi",))
        for kind in kinds:
            if kind == "lo" and (lo is None or bound > lo or (bound == lo and strict)):
                lo, lo_strict = bound, strict
            if kind == "hi" and (hi is None or bound < hi or (bound == hi and strict)):
                hi, hi_strict = bound, strict
    if lo is None or hi is None:
        return True
    return lo < hi or (lo == hi and not lo_strict and not hi_strict)


def farkas_resum(cert, cube) -> bool:
    """Recompute the certificate's combination and check it is a constant contradiction."""
    total: dict[str, Fraction] = {}
    constant = Fraction(0)
    strict = False
    only_eq = True
    for idx, lam in cert.multipliers:
        c = cube[idx]
        lam = Fraction(lam)
        if c.rel != EQ and lam < 0:
            return False
        if lam == 0:
            continue
        if c.rel != EQ:
            only_eq = False
        strict = strict or c.rel == GT
        for v, k in c.term.coeffs:
            total[v] = total.get(v, 0) + lam * k
        constant += lam * c.term.constant
    if any(k != 0 for k in total.values()):
        return False
    if only_eq:
        return constant != 0
    return constant < 0 or (constant == 0 and strict)


def random_cube(rng: random.Random, names, rows=4, coeff=3, const=6):
    out = []
    for _ in range(rows):
        coeffs = {v: rng.randint(-coeff, coeff) for v in names}
        rel = rng.choice([GE, GE, GT, EQ])
        out.append(LinConstraint(LinTerm.of(coeffs, rng.randint(-const, const)), rel))
    return out


def rankable_relation(rng: random.Random):
    """``{x >= c, x - x' >= d}`` with ``d > 0`` plus satisfiable side constraints on y."""
    c = rng.randint(-5, 5)
    d = rng.randint(1, 3)
    x, x1 = LinTerm.var("x"), LinTerm.var("x'")
    y, y1 = LinTerm.var("y"), LinTerm.var("y'")
    rows = [LinConstraint(x - c, GE), LinConstraint(x - x1 - d, GE)]
    side = rng.choice(["none", "copy", "grow", "box"])
    if side == "copy":
        rows.append(LinConstraint(y1 - y, EQ))
    elif side == "grow":
        rows.append(LinConstraint(y1 - y - rng.randint(0, 2), GE))
    elif side == "box":
        k = rng.randint(0, 4)
        rows += [LinConstraint(y - k, GE), LinConstraint(LinTerm.const(k + 5) - y, GE)]
    return rows


def brute_force_holds(hs, model) -> bool:
    """Check every clause by enumerating all integer points of its bounded universals."""
    import itertools

    from horn_forge.formula import evaluate

    for clause in hs.clauses:
        names = [v.name for v in clause.universals]
        bounds = clause.bounds()
        ranges = [range(bounds[n][0], bounds[n][1] + 1) for n in names]
        body = [model.instantiate(hs, a) for a in clause.body]
        head = None if clause.is_query else model.instantiate(hs, clause.head)
        for point in itertools.product(*ranges):
            env = dict(zip(names, point))
            if not evaluate(clause.constraint, env):
                continue
            if not all(evaluate(b, env) for b in body):
                continue
            if head is None or not evaluate(head, env):
                return False
    return True


def mutants(f):
    """Small perturbations of a formula: shifted constants, dropped parts, constants."""
    from horn_forge.formula import FALSE, TRUE, And, Atom, Or, atom, conj, disj

    out = []
    if isinstance(f, Atom):
        c = f.constraint
        for d in (-1, 1):
            out.append(atom(c.term + LinTerm.const(d), c.rel))
        return out
    if isinstance(f, (And, Or)):
        join = conj if isinstance(f, And) else disj
        kids = list(f.children)
        for i, kid in enumerate(kids):
            if len(kids) > 1:
                out.append(join(kids[:i] + kids[i + 1:]))
            for m in mutants(kid):
                out.append(join(kids[:i] + [m] + kids[i + 1:]))
    out += [TRUE, FALSE]
    return list(dict.fromkeys(m for m in out if m != f))
