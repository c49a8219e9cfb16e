"""Symbolic summaries of finite fact sets: affine hull, box and octagon bounds."""
from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

from ..formula import EQ, FALSE, GE, LinTerm, atom, conj

OCTAGON_MAX_VARS = 4


def _nullspace(rows: list[list[Fraction]], n: int) -> list[list[Fraction]]:
    """Basis of {a | r . a = 0 for every row r} by Gauss-Jordan elimination."""
    m = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(n):
        pivot = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                k = m[i][c]
                m[i] = [a - k * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    basis = []
    for free in (c for c in range(n) if c not in pivots):
        vec = [Fraction(0)] * n
        vec[free] = Fraction(1)
        for i, c in enumerate(pivots):
            vec[c] = -m[i][free]
        basis.append(vec)
    return basis


def affine_equalities(params: Sequence[str], points: Sequence[tuple]):
    """Linear equalities satisfied by every point (a basis of the affine hull's normals)."""
    pts = [[Fraction(x) for x in p] for p in points]
    base = pts[0]
    diffs = [[a - b for a, b in zip(p, base)] for p in pts[1:]]
    out = []
    for vec in _nullspace(diffs, len(params)):
        scale = lcm(*(x.denominator for x in vec))
        coeffs = [x * scale for x in vec]
        rhs = sum(c * b for c, b in zip(coeffs, base))
        out.append(atom(LinTerm.of(dict(zip(params, coeffs)), -rhs), EQ))
    return out


def hull_formula(params: Sequence[str], points: Iterable[tuple]):
    points = sorted(set(map(tuple, points)))
    if not points:
        return FALSE
    parts = affine_equalities(params, points)
    terms = [(LinTerm.var(v), [p[i] for p in points]) for i, v in enumerate(params)]
    if len(params) <= OCTAGON_MAX_VARS:
        for i in range(len(params)):
            for j in range(i + 1, len(params)):
                for sign in (1, -1):
                    t = LinTerm.var(params[i]) + LinTerm.var(params[j]).scale(sign)
                    terms.append((t, [p[i] + sign * p[j] for p in points]))
    for t, values in terms:
        parts.append(atom(t - min(values), GE))
        parts.append(atom(LinTerm.const(max(values)) - t, GE))
    return conj(parts)


__all__ = ["affine_equalities", "hull_formula"]
