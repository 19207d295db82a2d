"""Exact linear programming over Fractions: two-phase tableau simplex with Bland's rule."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import ValidationError


class Infeasible(ValidationError):
    pass


class Unbounded(ValidationError):
    pass


@dataclass(frozen=True)
class LPResult:
    x: tuple
    value: Fraction


def _pivot(tab: list[list[Fraction]], basis: list[int], row: int, col: int) -> None:
    piv = tab[row][col]
    tab[row] = [v / piv for v in tab[row]]
    prow = tab[row]
    for r in range(len(tab)):
        if r != row:
            f = tab[r][col]
            if f:
                tab[r] = [a - f * b for a, b in zip(tab[r], prow)]
    basis[row] = col


def _simplex(tab: list[list[Fraction]], basis: list[int], allowed: int) -> None:
    """Maximize the objective stored (negated) in the last row, entering columns < allowed."""
    obj = tab[-1]
    rows = len(tab) - 1
    while True:
        obj = tab[-1]
        col = next((j for j in range(allowed) if obj[j] < 0), None)
        if col is None:
            return
        best, row = None, None
        for r in range(rows):
            a = tab[r][col]
            if a > 0:
                ratio = tab[r][-1] / a
                if best is None or ratio < best or (ratio == best and basis[r] < basis[row]):
                    best, row = ratio, r
        if row is None:
            raise Unbounded("objective is unbounded")
        _pivot(tab, basis, row, col)


def maximize(c: Sequence, A_eq: Sequence[Sequence] = (), b_eq: Sequence = (),
             A_le: Sequence[Sequence] = (), b_le: Sequence = (),
             A_ge: Sequence[Sequence] = (), b_ge: Sequence = ()) -> LPResult:
    """Maximize c.x subject to the given rows and x >= 0, exactly."""
    F = Fraction
    nv = len(c)
    rows: list[tuple[list[Fraction], Fraction, int]] = []  # (coefficients, rhs, slack sign)
    for A, b, sign in ((A_eq, b_eq, 0), (A_le, b_le, 1), (A_ge, b_ge, -1)):
        if len(A) != len(b):
            raise ValidationError("constraint matrix and right-hand side differ in length")
        for a, rhs in zip(A, b):
            if len(a) != nv:
                raise ValidationError("constraint row has the wrong number of variables")
            rows.append(([F(v) for v in a], F(rhs), sign))
    n_slack = sum(1 for _, _, s in rows if s)
    n_rows = len(rows)
    width = nv + n_slack + n_rows + 1  # variables, slacks, artificials, rhs
    tab: list[list[Fraction]] = []
    slack = nv
    for r, (a, rhs, sign) in enumerate(rows):
        line = a + [F(0)] * (n_slack + n_rows + 1)
        if sign:
            line[slack] = F(sign)
            slack += 1
        if rhs < 0:
            line = [-v for v in line]
            rhs = -rhs
        line[nv + n_slack + r] = F(1)
        line[-1] = rhs
        tab.append(line)
    basis = [nv + n_slack + r for r in range(n_rows)]
    # phase 1: maximize -(sum of artificials)
    phase1 = [F(0)] * width
    for line in tab:
        phase1 = [p - v for p, v in zip(phase1, line)]
    for r in range(n_rows):
        phase1[nv + n_slack + r] = F(0)
    tab.append(phase1)
    _simplex(tab, basis, nv + n_slack)
    if tab[-1][-1] != 0:
        raise Infeasible("constraints are infeasible")
    tab.pop()
    # drive artificials out of the basis; drop redundant rows
    r = 0
    while r < len(tab):
        if basis[r] >= nv + n_slack:
            col = next((j for j in range(nv + n_slack) if tab[r][j] != 0), None)
            if col is None:
                del tab[r]
                del basis[r]
                continue
            _pivot(tab, basis, r, col)
        r += 1
    cut = nv + n_slack
    tab = [line[:cut] + [line[-1]] for line in tab]
    objective = [-F(v) for v in c] + [F(0)] * (n_slack + 1)
    for r, b in enumerate(basis):
        f = objective[b]
        if f:
            objective = [o - f * v for o, v in zip(objective, tab[r])]
    tab.append(objective)
    _simplex(tab, basis, cut)
    x = [F(0)] * cut
    for r, b in enumerate(basis):
        x[b] = tab[r][-1]
    return LPResult(tuple(x[:nv]), tab[-1][-1])
