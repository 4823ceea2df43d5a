"""Two-phase primal simplex over exact rationals with Bland's rule.

Solves ``min c.x  s.t.  A x = b, x >= 0``.  Infeasible problems come back with
a Farkas vector ``y`` such that ``y.A <= 0`` columnwise and ``y.b > 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


class CyclingError(RuntimeError):
    """Pivot budget exhausted; Bland's rule makes this an implementation fault."""


@dataclass
class LPResult:
    status: str
    x: list[Fraction] | None = None
    objective: Fraction | None = None
    farkas: list[Fraction] | None = None
    pivots: int = 0
    basis: list[int] = field(default_factory=list)


class _Tableau:
    def __init__(self, rows: list[list[Fraction]], rhs: list[Fraction], basis: list[int]):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.pivots = 0

    def pivot(self, r: int, j: int, cost_rows: list[tuple[list[Fraction], list[Fraction]]]):
        prow = self.rows[r]
        piv = prow[j]
        if piv != 1:
            inv = 1 / piv
            for k, v in enumerate(prow):
                if v:
                    prow[k] = v * inv
            self.rhs[r] *= inv
        support = [k for k, v in enumerate(prow) if v]
        prhs = self.rhs[r]
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row[j]
            if f:
                for k in support:
                    row[k] -= f * prow[k]
                self.rhs[i] -= f * prhs
        for cost, value in cost_rows:
            f = cost[j]
            if f:
                for k in support:
                    cost[k] -= f * prow[k]
                value[0] -= f * prhs
        self.basis[r] = j
        self.pivots += 1

    def ratio_row(self, j: int) -> int | None:
        best, best_ratio = None, None
        for i, row in enumerate(self.rows):
            a = row[j]
            if a > 0:
                ratio = self.rhs[i] / a
                if best is None or ratio < best_ratio or (ratio == best_ratio and self.basis[i] < self.basis[best]):
                    best, best_ratio = i, ratio
        return best


def _run(tab: _Tableau, cost: list[Fraction], value: list[Fraction], allowed: int, extra, max_pivots: int) -> str:
    while True:
        entering = next((j for j in range(allowed) if cost[j] < 0), None)
        if entering is None:
            return OPTIMAL
        r = tab.ratio_row(entering)
        if r is None:
            return UNBOUNDED
        if tab.pivots >= max_pivots:
            raise CyclingError(f"no convergence after {max_pivots} pivots")
        tab.pivot(r, entering, [(cost, value)] + extra)


def solve_lp(A: Sequence[Sequence], b: Sequence, c: Sequence | None = None, max_pivots: int = 100_000) -> LPResult:
    m = len(A)
    n = len(A[0]) if m else 0
    c = [Fraction(0)] * n if c is None else [Fraction(v) for v in c]
    signs = [1 if Fraction(bi) >= 0 else -1 for bi in b]
    rows = []
    for i in range(m):
        s = signs[i]
        row = [Fraction(v) * s for v in A[i]] + [Fraction(0)] * m
        row[n + i] = Fraction(1)
        rows.append(row)
    rhs = [Fraction(bi) * s for bi, s in zip(b, signs)]
    tab = _Tableau(rows, rhs, [n + i for i in range(m)])

    # phase 1: minimise the sum of artificials; reduced costs start at -colsum
    cost1 = [-sum(row[j] for row in rows) for j in range(n)] + [Fraction(0)] * m
    value1 = [-sum(rhs)]
    status = _run(tab, cost1, value1, n, [], max_pivots)
    assert status == OPTIMAL
    if -value1[0] > 0:
        # reduced cost of artificial i is 1 - y_i
        y = [(1 - cost1[n + i]) * signs[i] for i in range(m)]
        return LPResult(INFEASIBLE, farkas=y, pivots=tab.pivots, basis=list(tab.basis))

    # drive remaining artificials out of the basis; drop redundant rows
    cost2 = c + [Fraction(0)] * m
    value2 = [Fraction(0)]
    for r in range(m - 1, -1, -1):
        if tab.basis[r] < n:
            continue
        j = next((k for k in range(n) if tab.rows[r][k] != 0), None)
        if j is None:
            del tab.rows[r], tab.rhs[r], tab.basis[r]
        else:
            tab.pivot(r, j, [(cost1, value1)])
    for r, j in enumerate(tab.basis):
        f = cost2[j]
        if f:
            row = tab.rows[r]
            for k, v in enumerate(row):
                if v:
                    cost2[k] -= f * v
            value2[0] -= f * tab.rhs[r]
    status = _run(tab, cost2, value2, n, [], max_pivots)
    x = [Fraction(0)] * n
    for r, j in enumerate(tab.basis):
        x[j] = tab.rhs[r]
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, x=x, pivots=tab.pivots, basis=list(tab.basis))
    obj = sum((ci * xi for ci, xi in zip(c, x)), Fraction(0))
    return LPResult(OPTIMAL, x=x, objective=obj, pivots=tab.pivots, basis=list(tab.basis))
