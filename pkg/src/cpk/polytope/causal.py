"""NBTS polytope constraints, classical causal vertices, membership and extremality."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from math import gcd, lcm
from typing import Sequence

from .rank import exact_rank
from .simplex import INFEASIBLE, OPTIMAL, solve_lp
from .table import ProbTable, bits

PARTY_NAMES = ("A", "B", "C", "D", "E", "F")


@dataclass(frozen=True)
class Equality:
    """``sum_k coeffs[k] * p_k == rhs`` with integer coefficients over the flat table index."""

    coeffs: tuple[int, ...]
    rhs: int
    tag: str

    def holds(self, p: ProbTable) -> bool:
        return sum(c * e for c, e in zip(self.coeffs, p.entries) if c) == self.rhs


def nbts_equalities(n_parties: int = 3) -> list[Equality]:
    """Normalisation per input setting, then own-input independence of each party's marginal."""
    return list(_nbts_equalities(n_parties))


@lru_cache(maxsize=None)
def _nbts_equalities(n_parties: int) -> tuple[Equality, ...]:
    n = n_parties
    size = 4**n
    probe = ProbTable(n, [0] * size)
    eqs = []
    for inputs in bits(n):
        coeffs = [0] * size
        for outs in bits(n):
            coeffs[probe.index(outs, inputs)] = 1
        eqs.append(Equality(tuple(coeffs), 1, f"norm[{''.join(map(str, inputs))}]"))
    for k in range(n):
        name = PARTY_NAMES[k]
        for own in (0, 1):
            for others in bits(n - 1):
                coeffs = [0] * size
                for own_in, sign in ((0, 1), (1, -1)):
                    inputs = others[:k] + (own_in,) + others[k:]
                    for outs in bits(n):
                        if outs[k] == own:
                            coeffs[probe.index(outs, inputs)] += sign
                tag = f"nbts[{name}: out={own}, others_in={''.join(map(str, others))}]"
                eqs.append(Equality(tuple(coeffs), 0, tag))
    return tuple(eqs)


def violated_equalities(p: ProbTable) -> list[str]:
    return [eq.tag for eq in nbts_equalities(p.n_parties) if not eq.holds(p)]


def in_nbts_polytope(p: ProbTable) -> bool:
    return p.is_nonnegative() and not violated_equalities(p)


def nbts_dimension(n_parties: int = 3) -> int:
    """Affine dimension of the NBTS polytope's equality hull."""
    return 4**n_parties - exact_rank([eq.coeffs for eq in nbts_equalities(n_parties)])


# --- deterministic strategies --------------------------------------------------------------------


@dataclass(frozen=True)
class Branch:
    second: int
    second_output: int
    third_outputs: tuple[int, int]  # indexed by the second mover's input


@dataclass(frozen=True)
class DetStrategy:
    """Three-party adaptive deterministic strategy.

    The first party outputs a constant; its input picks the branch, which fixes
    who goes second, that party's output, and the last party's output as a
    function of the second mover's input.
    """

    first: int
    first_output: int
    branches: tuple[Branch, Branch]

    def outputs(self, inputs: Sequence[int]) -> tuple[int, ...]:
        br = self.branches[inputs[self.first]]
        third = 3 - self.first - br.second
        out = [0, 0, 0]
        out[self.first] = self.first_output
        out[br.second] = br.second_output
        out[third] = br.third_outputs[inputs[br.second]]
        return tuple(out)

    def table(self) -> ProbTable:
        return ProbTable.from_function(3, lambda o, i: int(o == self.outputs(i)))


def all_strategies() -> list[DetStrategy]:
    out = []
    for first in range(3):
        seconds = [k for k in range(3) if k != first]
        branch_opts = [
            Branch(s, so, tf)
            for s in seconds
            for so in (0, 1)
            for tf in itertools.product((0, 1), repeat=2)
        ]
        for fo in (0, 1):
            for b0, b1 in itertools.product(branch_opts, repeat=2):
                out.append(DetStrategy(first, fo, (b0, b1)))
    return out


def enumerate_classical_vertices() -> list[ProbTable]:
    """Distinct tables of all deterministic adaptive strategies, in first-seen order."""
    seen, verts = set(), []
    for s in all_strategies():
        t = s.table()
        key = t.key_string()
        if key not in seen:
            seen.add(key)
            verts.append(t)
    return verts


# --- certificates --------------------------------------------------------------------------------


@dataclass
class Certificate:
    kind: str  # "membership" | "separation"
    weights: dict[int, Fraction] = field(default_factory=dict)
    y: list[int] | None = None
    bound: int | None = None

    @property
    def is_member(self) -> bool:
        return self.kind == "membership"

    def verify(self, p: ProbTable, vertices: Sequence[ProbTable]) -> bool:
        if self.kind == "membership":
            if any(w < 0 for w in self.weights.values()) or sum(self.weights.values()) != 1:
                return False
            mix = [Fraction(0)] * len(p.entries)
            for vid, w in self.weights.items():
                for k, e in enumerate(vertices[vid].entries):
                    if e:
                        mix[k] += w * e
            return tuple(mix) == p.entries
        lhs_p = sum(Fraction(c) * e for c, e in zip(self.y, p.entries) if c)
        if not lhs_p > self.bound:
            return False
        return all(sum(c * e for c, e in zip(self.y, v.entries) if c) <= self.bound for v in vertices)

    def to_json(self) -> dict:
        if self.kind == "membership":
            return {
                "kind": self.kind,
                "weights": {str(k): f"{w.numerator}/{w.denominator}" for k, w in sorted(self.weights.items())},
            }
        return {"kind": self.kind, "y": list(self.y), "bound": self.bound}


class CertificateError(RuntimeError):
    """A certificate failed exact re-verification."""


def _integerize(y: Sequence[Fraction], y0: Fraction) -> tuple[list[int], int]:
    vals = [Fraction(v) for v in y] + [Fraction(y0)]
    scale = lcm(*(v.denominator for v in vals))
    ints = [int(v * scale) for v in vals]
    g = 0
    for v in ints:
        g = gcd(g, v)
    g = g or 1
    ints = [v // g for v in ints]
    return ints[:-1], ints[-1]


def membership(p: ProbTable, vertices: Sequence[ProbTable]) -> Certificate:
    """Exact LP: is ``p`` a convex mixture of ``vertices``?"""
    size = len(p.entries)
    A = [[v.entries[k] for v in vertices] for k in range(size)] + [[1] * len(vertices)]
    b = list(p.entries) + [1]
    res = solve_lp(A, b)
    if res.status == OPTIMAL:
        cert = Certificate("membership", {k: w for k, w in enumerate(res.x) if w})
    elif res.status == INFEASIBLE:
        # y_p . v + y_0 <= 0 for every vertex and y_p . p + y_0 > 0
        y, bound = _integerize(res.farkas[:size], -res.farkas[size])
        cert = Certificate("separation", y=y, bound=bound)
    else:  # pragma: no cover - a zero objective cannot be unbounded
        raise RuntimeError(f"unexpected LP status {res.status}")
    if not cert.verify(p, vertices):
        raise CertificateError(f"{cert.kind} certificate failed exact re-verification")
    return cert


# --- extremality, symmetries, last mover ---------------------------------------------------------


@dataclass
class ExtremalityReport:
    in_polytope: bool
    is_extreme: bool
    saturated_rank: int
    n_zeros: int


def extremality(p: ProbTable) -> ExtremalityReport:
    if not in_nbts_polytope(p):
        return ExtremalityReport(False, False, 0, 0)
    size = len(p.entries)
    zeros = [k for k, e in enumerate(p.entries) if e == 0]
    rank = len(zeros) + exact_rank(_equalities_on_support(p))
    return ExtremalityReport(True, rank == size, rank, len(zeros))


def _equalities_on_support(p: ProbTable) -> list[list[int]]:
    # each unit row e_k for a zero entry eliminates column k exactly
    keep = [k for k, e in enumerate(p.entries) if e != 0]
    return [[eq.coeffs[k] for k in keep] for eq in nbts_equalities(p.n_parties)]


def saturated_rows(p: ProbTable) -> list[list[int]]:
    """Full saturated system: every equality plus a unit row per zero entry."""
    rows = [list(eq.coeffs) for eq in nbts_equalities(p.n_parties)]
    for k, e in enumerate(p.entries):
        if e == 0:
            unit = [0] * len(p.entries)
            unit[k] = 1
            rows.append(unit)
    return rows


def _neg(bit: int) -> int:
    return bit ^ 1


SYMMETRIES = {
    "flip all outputs": lambda a, b, c, x, y, z: (_neg(a), _neg(b), _neg(c), x, y, z),
    "flip all inputs": lambda a, b, c, x, y, z: (a, b, c, _neg(x), _neg(y), _neg(z)),
    "cyclic shift": lambda a, b, c, x, y, z: (b, c, a, y, z, x),
    "flip b and z": lambda a, b, c, x, y, z: (a, _neg(b), c, x, y, _neg(z)),
}


def symmetry_failures(p: ProbTable) -> dict[str, int]:
    out = {}
    for name, fn in SYMMETRIES.items():
        bad = 0
        for idx in itertools.product((0, 1), repeat=6):
            a, b, c, x, y, z = fn(*idx)
            if p[(idx[:3], idx[3:])] != p[((a, b, c), (x, y, z))]:
                bad += 1
        out[name] = bad
    return out


def verify_symmetries(p: ProbTable) -> bool:
    if p.n_parties != 3:
        raise ValueError("symmetry relations are defined for three parties")
    return not any(symmetry_failures(p).values())


def last_mover_violations(p: ProbTable) -> list[tuple]:
    """Support points whose three single-input flips all have probability zero."""
    if p.n_parties != 3:
        raise ValueError("last-mover check is defined for three parties")
    bad = []
    for outs, ins in p.keys():
        if p[(outs, ins)] > 0:
            flips = [tuple(v ^ (k == j) for k, v in enumerate(ins)) for j in range(3)]
            if sum(p[(outs, f)] for f in flips) <= 0:
                bad.append((outs, ins))
    return bad


def last_mover_check(p: ProbTable) -> bool:
    return not last_mover_violations(p)


def support(p: ProbTable) -> list[tuple]:
    return [key for key, e in p.items() if e > 0]
