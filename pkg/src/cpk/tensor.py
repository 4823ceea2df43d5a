"""Labeled dense tensors and the bullet contraction.

Every axis of a :class:`LabeledTensor` carries a :class:`SpaceLabel`: a space
name, a dagger flag (the conjugate copy of the space) and a variance.  A
raised label is a ket-like slot, a lowered label a bra-like slot.  ``bullet``
contracts each raised label against the identical lowered label of the other
operand and tensors everything else together.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

UP = "up"
DOWN = "down"

ATOL = 1e-12


class LabelError(ValueError):
    """Inconsistent or colliding labels."""


@dataclass(frozen=True, order=True)
class SpaceLabel:
    name: str
    dagger: bool = False
    variance: str = UP
    dim: int = 2

    def __post_init__(self):
        if self.variance not in (UP, DOWN):
            raise LabelError(f"variance must be 'up' or 'down', got {self.variance!r}")
        if self.dim < 1:
            raise LabelError(f"dim must be positive, got {self.dim}")

    @property
    def key(self) -> tuple[str, bool, str]:
        return (self.name, self.dagger, self.variance)

    @property
    def space(self) -> tuple[str, bool]:
        return (self.name, self.dagger)

    def flipped(self) -> "SpaceLabel":
        return SpaceLabel(self.name, self.dagger, DOWN if self.variance == UP else UP, self.dim)

    def contractible(self, other: "SpaceLabel") -> bool:
        return self.space == other.space and self.variance != other.variance


def up(name: str, dagger: bool = False, dim: int = 2) -> SpaceLabel:
    return SpaceLabel(name, dagger, UP, dim)


def down(name: str, dagger: bool = False, dim: int = 2) -> SpaceLabel:
    return SpaceLabel(name, dagger, DOWN, dim)


def _sort_key(label: SpaceLabel):
    return label.key


class LabeledTensor:
    """Immutable dense complex tensor with labeled axes in canonical order.

    Construction accepts labels in any order; the data is transposed so the
    stored axes are sorted by ``(name, dagger, variance)``.
    """

    __slots__ = ("labels", "data")

    def __init__(self, labels: Sequence[SpaceLabel], data):
        labels = tuple(labels)
        data = np.asarray(data, dtype=complex)
        keys = [lab.key for lab in labels]
        if len(set(keys)) != len(keys):
            raise LabelError(f"duplicate labels in {keys}")
        shape = tuple(lab.dim for lab in labels)
        if data.size != int(np.prod(shape, dtype=int)):
            raise LabelError(f"data of size {data.size} does not fit label dims {shape}")
        data = data.reshape(shape)
        order = sorted(range(len(labels)), key=lambda k: keys[k])
        data = np.ascontiguousarray(np.transpose(data, order)) if labels else data.reshape(())
        data.setflags(write=False)
        object.__setattr__(self, "labels", tuple(labels[k] for k in order))
        object.__setattr__(self, "data", data)

    def __setattr__(self, name, value):
        raise AttributeError("LabeledTensor is immutable")

    @classmethod
    def scalar(cls, value: complex) -> "LabeledTensor":
        return cls((), np.asarray(value, dtype=complex))

    @property
    def rank(self) -> int:
        return len(self.labels)

    @property
    def keys(self) -> tuple:
        return tuple(lab.key for lab in self.labels)

    def axis(self, key) -> int:
        if isinstance(key, SpaceLabel):
            key = key.key
        try:
            return self.keys.index(tuple(key))
        except ValueError:
            raise LabelError(f"label {key} not present") from None

    def item(self) -> complex:
        if self.labels:
            raise LabelError(f"tensor of rank {self.rank} is not a scalar")
        return complex(self.data)

    def to_array(self, order: Iterable) -> np.ndarray:
        """Data with axes permuted into ``order`` (labels or key triples)."""
        axes = [self.axis(k) for k in order]
        if sorted(axes) != list(range(self.rank)):
            raise LabelError("order must list every label exactly once")
        return np.transpose(self.data, axes)

    def __add__(self, other: "LabeledTensor") -> "LabeledTensor":
        _check_same_labels(self, other)
        return LabeledTensor(self.labels, self.data + other.data)

    def __sub__(self, other: "LabeledTensor") -> "LabeledTensor":
        _check_same_labels(self, other)
        return LabeledTensor(self.labels, self.data - other.data)

    def __mul__(self, factor) -> "LabeledTensor":
        return LabeledTensor(self.labels, self.data * factor)

    __rmul__ = __mul__

    def __truediv__(self, factor) -> "LabeledTensor":
        return LabeledTensor(self.labels, self.data / factor)

    def __neg__(self) -> "LabeledTensor":
        return LabeledTensor(self.labels, -self.data)

    def allclose(self, other: "LabeledTensor", atol: float = ATOL) -> bool:
        other = as_tensor(other)
        return self.labels == other.labels and bool(np.allclose(self.data, other.data, rtol=0, atol=atol))

    def __repr__(self):
        labs = ", ".join(
            f"{lab.name}{'†' if lab.dagger else ''}{'^' if lab.variance == UP else '_'}" for lab in self.labels
        )
        return f"LabeledTensor([{labs}], shape={self.data.shape})"


def _check_same_labels(a: LabeledTensor, b: LabeledTensor):
    if a.labels != b.labels:
        raise LabelError(f"label mismatch: {a.keys} vs {b.keys}")


def as_tensor(obj) -> LabeledTensor:
    """Unwrap objects that carry a ``tensor`` attribute (channels, states)."""
    if isinstance(obj, LabeledTensor):
        return obj
    inner = getattr(obj, "tensor", None)
    if isinstance(inner, LabeledTensor):
        return inner
    raise TypeError(f"expected a LabeledTensor, got {type(obj).__name__}")


def bullet(a, b) -> LabeledTensor:
    """Contract matching raised/lowered label pairs; tensor the rest."""
    a, b = as_tensor(a), as_tensor(b)
    a_keys = {lab.key: k for k, lab in enumerate(a.labels)}
    pairs_a, pairs_b = [], []
    for kb, lab in enumerate(b.labels):
        if lab.key in a_keys:
            raise LabelError(f"same-variance collision on label {lab.key}")
        partner = lab.flipped().key
        if partner in a_keys:
            ka = a_keys[partner]
            if a.labels[ka].dim != lab.dim:
                raise LabelError(f"dimension mismatch on {lab.space}: {a.labels[ka].dim} vs {lab.dim}")
            pairs_a.append(ka)
            pairs_b.append(kb)
    data = np.tensordot(a.data, b.data, axes=(pairs_a, pairs_b))
    rest = [lab for k, lab in enumerate(a.labels) if k not in pairs_a]
    rest += [lab for k, lab in enumerate(b.labels) if k not in pairs_b]
    return LabeledTensor(rest, data)


def tensor(a, b) -> LabeledTensor:
    """Outer product of two tensors over disjoint spaces."""
    a, b = as_tensor(a), as_tensor(b)
    shared = {lab.space for lab in a.labels} & {lab.space for lab in b.labels}
    if shared:
        raise LabelError(f"tensor product requires disjoint spaces, shared: {sorted(shared)}")
    return LabeledTensor(a.labels + b.labels, np.multiply.outer(a.data, b.data))


def tensor_all(items: Iterable) -> LabeledTensor:
    out = LabeledTensor.scalar(1.0)
    for item in items:
        out = tensor(out, item)
    return out


def contract_all(items: Iterable) -> LabeledTensor:
    out = LabeledTensor.scalar(1.0)
    for item in items:
        out = bullet(out, item)
    return out


def relabel(t, mapping: Mapping[str, str]) -> LabeledTensor:
    """Rename spaces; the data is untouched apart from canonical reordering."""
    t = as_tensor(t)
    names = {lab.name for lab in t.labels}
    targets = [mapping.get(n, n) for n in names]
    if len(set(targets)) != len(targets):
        raise LabelError(f"relabeling {dict(mapping)} merges distinct spaces")
    labels = [SpaceLabel(mapping.get(lab.name, lab.name), lab.dagger, lab.variance, lab.dim) for lab in t.labels]
    return LabeledTensor(labels, t.data)


def ket(name: str, index: int, dim: int = 2) -> LabeledTensor:
    """|index> on space ``name`` (raised, non-dagger)."""
    v = np.zeros(dim, dtype=complex)
    v[index] = 1
    return LabeledTensor([up(name, dim=dim)], v)


def bra(name: str, index: int, dim: int = 2) -> LabeledTensor:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1
    return LabeledTensor([down(name, dim=dim)], v)


def to_json(t) -> dict:
    t = as_tensor(t)
    flat = t.data.reshape(-1)
    return {
        "labels": [
            {"name": lab.name, "dagger": lab.dagger, "variance": lab.variance, "dim": lab.dim} for lab in t.labels
        ],
        "data": [[float(z.real), float(z.imag)] for z in flat],
    }


def from_json(obj: Mapping) -> LabeledTensor:
    try:
        labels = [SpaceLabel(d["name"], bool(d["dagger"]), d["variance"], int(d["dim"])) for d in obj["labels"]]
        data = np.array([complex(re, im) for re, im in obj["data"]], dtype=complex)
    except (KeyError, TypeError, ValueError) as exc:
        raise LabelError(f"malformed tensor JSON: {exc}") from exc
    return LabeledTensor(labels, data)
