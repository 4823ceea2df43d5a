"""Fraction-free (Bareiss) elimination for exact rank."""
from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Sequence


def integer_rows(rows: Sequence[Sequence]) -> list[list[int]]:
    """Scale each rational row by the lcm of its denominators."""
    out = []
    for row in rows:
        fr = [Fraction(v) for v in row]
        scale = lcm(*(f.denominator for f in fr)) if fr else 1
        out.append([int(f * scale) for f in fr])
    return out


def exact_rank(rows: Sequence[Sequence]) -> int:
    m = integer_rows(rows)
    if not m:
        return 0
    n_rows, n_cols = len(m), len(m[0])
    rank, prev = 0, 1
    for col in range(n_cols):
        if rank == n_rows:
            break
        pivot = next((r for r in range(rank, n_rows) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        p = m[rank][col]
        for r in range(rank + 1, n_rows):
            row = m[r]
            f = row[col]
            prow = m[rank]
            for k in range(col + 1, n_cols):
                # exact division is guaranteed by Sylvester's identity
                row[k] = (p * row[k] - f * prow[k]) // prev
            row[col] = 0
        prev = p
        rank += 1
    return rank
