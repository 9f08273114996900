"""Exact linear programming over the rationals.

A dense two-phase primal simplex with Bland's rule: slow but exact and
cycle-free.  Intended for the small instances this package certifies
(a few hundred variables); larger routing LPs go through the float path
in `routing` and are re-verified exactly there.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: list[Fraction]
    objective: Fraction | None


def _pivot(tab: list[list[Fraction]], basis: list[int], row: int, col: int) -> None:
    piv = tab[row][col]
    inv = ONE / piv
    tab[row] = [v * inv for v in tab[row]]
    prow = tab[row]
    for r, trow in enumerate(tab):
        if r == row:
            continue
        factor = trow[col]
        if factor == 0:
            continue
        tab[r] = [a - factor * b for a, b in zip(trow, prow)]
    basis[row] = col


def _run_simplex(tab: list[list[Fraction]], basis: list[int], ncols: int) -> str:
    """Drive the objective row (last row) to optimality with Bland's rule."""
    obj = len(tab) - 1
    while True:
        col = -1
        for j in range(ncols):
            if tab[obj][j] < 0:
                col = j
                break
        if col == -1:
            return "optimal"
        row = -1
        best = None
        for r in range(len(tab) - 1):
            a = tab[r][col]
            if a > 0:
                ratio = tab[r][-1] / a
                if best is None or ratio < best or (ratio == best and basis[r] < basis[row]):
                    best = ratio
                    row = r
        if row == -1:
            return "unbounded"
        _pivot(tab, basis, row, col)


def solve_lp(
    c: Sequence[Fraction],
    a_ub: Sequence[Sequence[Fraction]] = (),
    b_ub: Sequence[Fraction] = (),
    a_eq: Sequence[Sequence[Fraction]] = (),
    b_eq: Sequence[Fraction] = (),
) -> LpResult:
    """Minimize c.x subject to a_ub x <= b_ub, a_eq x == b_eq, x >= 0."""
    n = len(c)
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    kinds: list[str] = []
    for row, b in zip(a_ub, b_ub):
        rows.append([Fraction(v) for v in row])
        rhs.append(Fraction(b))
        kinds.append("ub")
    for row, b in zip(a_eq, b_eq):
        rows.append([Fraction(v) for v in row])
        rhs.append(Fraction(b))
        kinds.append("eq")
    m = len(rows)
    nslack = sum(1 for k in kinds if k == "ub")

    # columns: n structural, nslack slacks, artificials appended as needed
    slack_idx = {}
    si = n
    for i, k in enumerate(kinds):
        if k == "ub":
            slack_idx[i] = si
            si += 1

    tab: list[list[Fraction]] = []
    basis: list[int] = []
    art_cols: list[int] = []
    next_col = n + nslack
    for i in range(m):
        row = rows[i] + [ZERO] * nslack
        if i in slack_idx:
            row[slack_idx[i]] = ONE
        b = rhs[i]
        if b < 0:
            row = [-v for v in row]
            b = -b
        # basic column: the slack if it survived the sign flip, else artificial
        if i in slack_idx and row[slack_idx[i]] == ONE:
            basis.append(slack_idx[i])
        else:
            art_cols.append(next_col)
            basis.append(next_col)
            next_col += 1
        tab.append(row + [b])
    total_cols = next_col
    for i, trow in enumerate(tab):
        need = total_cols - (len(trow) - 1)
        b = trow.pop()
        trow.extend([ZERO] * need)
        if basis[i] >= n + nslack:
            trow[basis[i]] = ONE
        trow.append(b)

    if art_cols:
        # phase 1: minimize sum of artificials
        obj = [ZERO] * total_cols + [ZERO]
        for j in art_cols:
            obj[j] = ONE
        tab.append(obj)
        for r in range(m):
            if basis[r] in art_cols:
                tab[-1] = [a - b for a, b in zip(tab[-1], tab[r])]
        status = _run_simplex(tab, basis, total_cols)
        if status != "optimal" or tab[-1][-1] != 0:
            return LpResult("infeasible", [], None)
        tab.pop()
        # drive any artificial still basic out; an all-zero row is redundant
        redundant = []
        for r in range(m):
            if basis[r] in art_cols:
                for j in range(n + nslack):
                    if tab[r][j] != 0:
                        _pivot(tab, basis, r, j)
                        break
                else:
                    redundant.append(r)
        for r in reversed(redundant):
            del tab[r]
            del basis[r]
        m = len(tab)
        # drop artificial columns
        keep = n + nslack
        for r in range(m):
            b = tab[r].pop()
            del tab[r][keep:]
            tab[r].append(b)
        total_cols = keep

    obj = [Fraction(v) for v in c] + [ZERO] * (total_cols - n) + [ZERO]
    tab.append(obj)
    for r in range(m):
        if basis[r] < n and tab[-1][basis[r]] != 0:
            factor = tab[-1][basis[r]]
            tab[-1] = [a - factor * b for a, b in zip(tab[-1], tab[r])]
    status = _run_simplex(tab, basis, total_cols)
    if status == "unbounded":
        return LpResult("unbounded", [], None)
    x = [ZERO] * n
    for r in range(m):
        if basis[r] < n:
            x[basis[r]] = tab[r][-1]
    objective = sum((ci * xi for ci, xi in zip(c, x)), ZERO)
    return LpResult("optimal", x, objective)
