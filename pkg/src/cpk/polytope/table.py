"""Exact conditional probability tables over binary inputs and outputs."""
from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

# Column and row order used in the printed 8x8 grid: weight first, then lexicographic.
GRID_ORDER = ("000", "001", "010", "100", "011", "101", "110", "111")


def bits(n: int) -> list[tuple[int, ...]]:
    return list(itertools.product((0, 1), repeat=n))


def parse_fraction(text) -> Fraction:
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if isinstance(text, str):
        return Fraction(text.strip())
    raise ValueError(f"cannot read {text!r} as an exact rational")


class ProbTable:
    """``p(outputs | inputs)`` stored as a flat tuple of Fractions.

    The flat index is row-major over ``(outputs..., inputs...)``, i.e. for three
    parties ``(a, b, c, x, y, z)``.
    """

    __slots__ = ("n_parties", "entries")

    def __init__(self, n_parties: int, entries: Iterable):
        entries = tuple(Fraction(e) for e in entries)
        if len(entries) != 4**n_parties:
            raise ValueError(f"expected {4 ** n_parties} entries for {n_parties} parties, got {len(entries)}")
        object.__setattr__(self, "n_parties", n_parties)
        object.__setattr__(self, "entries", entries)

    def __setattr__(self, name, value):
        raise AttributeError("ProbTable is immutable")

    @classmethod
    def from_mapping(cls, n_parties: int, mapping: Mapping) -> "ProbTable":
        """Build from ``{(outputs, inputs): value}``; every key must be present."""
        return cls(n_parties, [mapping[(o, i)] for o, i in cls.keys_for(n_parties)])

    @classmethod
    def from_function(cls, n_parties: int, fn) -> "ProbTable":
        return cls(n_parties, [fn(o, i) for o, i in cls.keys_for(n_parties)])

    @staticmethod
    def keys_for(n_parties: int) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
        for flat in itertools.product((0, 1), repeat=2 * n_parties):
            yield flat[:n_parties], flat[n_parties:]

    def keys(self):
        return self.keys_for(self.n_parties)

    def index(self, outputs, inputs) -> int:
        idx = 0
        for bit in tuple(outputs) + tuple(inputs):
            idx = 2 * idx + bit
        return idx

    def __getitem__(self, key) -> Fraction:
        outputs, inputs = key
        return self.entries[self.index(outputs, inputs)]

    def __eq__(self, other):
        return isinstance(other, ProbTable) and self.n_parties == other.n_parties and self.entries == other.entries

    def __hash__(self):
        return hash((self.n_parties, self.entries))

    def __len__(self):
        return len(self.entries)

    def __repr__(self):
        return f"ProbTable(n_parties={self.n_parties}, support={sum(1 for e in self.entries if e)})"

    def items(self):
        return zip(self.keys(), self.entries)

    def row_sums(self) -> dict:
        n = self.n_parties
        return {i: sum(self[(o, i)] for o in bits(n)) for i in bits(n)}

    def is_normalized(self) -> bool:
        return all(s == 1 for s in self.row_sums().values())

    def is_nonnegative(self) -> bool:
        return all(0 <= e <= 1 for e in self.entries)

    def is_deterministic(self) -> bool:
        return all(e in (0, 1) for e in self.entries)

    def key_string(self) -> str:
        """Canonical serialisation used as the deduplication key."""
        return ",".join(f"{e.numerator}/{e.denominator}" for e in self.entries)

    def to_json(self) -> dict:
        out = {}
        for (o, i), e in self.items():
            out["".join(map(str, o)) + "|" + "".join(map(str, i))] = f"{e.numerator}/{e.denominator}"
        return {"parties": self.n_parties, "entries": out}

    @classmethod
    def from_json(cls, obj: Mapping) -> "ProbTable":
        try:
            n = int(obj["parties"])
            raw = obj["entries"]
            mapping = {}
            for o, i in cls.keys_for(n):
                key = "".join(map(str, o)) + "|" + "".join(map(str, i))
                mapping[(o, i)] = parse_fraction(raw[key])
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"malformed probability table: {exc}") from exc
        if len(raw) != 4**n:
            raise ValueError(f"table has {len(raw)} entries, expected {4 ** n}")
        return cls.from_mapping(n, mapping)

    def grid(self) -> str:
        """Rows are inputs, columns outputs, both in the weight-then-lex order (3 parties)."""
        order = GRID_ORDER if self.n_parties == 3 else ["".join(map(str, b)) for b in bits(self.n_parties)]
        width = max(5, max(len(_fmt(e)) for e in self.entries) + 1)
        head = "in\\out".ljust(8) + "".join(c.rjust(width) for c in order)
        lines = [head]
        for row in order:
            i = tuple(int(ch) for ch in row)
            cells = [_fmt(self[(tuple(int(ch) for ch in col), i)]).rjust(width) for col in order]
            lines.append(row.ljust(8) + "".join(cells))
        return "\n".join(lines)


def _fmt(e: Fraction) -> str:
    return str(e.numerator) if e.denominator == 1 else f"{e.numerator}/{e.denominator}"


def uniform_table(n_parties: int = 3) -> ProbTable:
    return ProbTable(n_parties, [Fraction(1, 2**n_parties)] * 4**n_parties)


def constant_table(outputs=(0, 0, 0)) -> ProbTable:
    outputs = tuple(outputs)
    return ProbTable.from_function(len(outputs), lambda o, i: int(o == outputs))
