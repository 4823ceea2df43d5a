"""CP maps in two-time vector form.

A channel from space ``A`` to space ``B`` with Kraus operators ``E_k`` is the
vector ``sum_k E_k (x) E_k^*`` on four slots: the input ket space lowered, its
dagger copy raised, the output ket space raised and its dagger copy lowered.
Component ``[j, i, i', j']`` (out, in, in-dagger, out-dagger) equals
``sum_k E_k[j, i] * conj(E_k[j', i'])``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .tensor import LabeledTensor, LabelError, bullet, down, up

TP_ATOL = 1e-10
EXTREME_NAMES = ("identity", "flip", "replace0", "replace1")


@dataclass(frozen=True)
class ChannelVector:
    tensor: LabeledTensor
    in_space: str
    out_space: str

    @property
    def dim_in(self) -> int:
        return self.tensor.labels[self.tensor.axis((self.in_space, False, "down"))].dim

    @property
    def dim_out(self) -> int:
        return self.tensor.labels[self.tensor.axis((self.out_space, False, "up"))].dim

    def block(self) -> np.ndarray:
        """Data as ``[out, in, in_dagger, out_dagger]``."""
        return self.tensor.to_array(_slot_keys(self.in_space, self.out_space))

    def __add__(self, other: "ChannelVector") -> "ChannelVector":
        _check_spaces(self, other)
        return ChannelVector(self.tensor + other.tensor, self.in_space, self.out_space)

    def __mul__(self, factor) -> "ChannelVector":
        return ChannelVector(self.tensor * factor, self.in_space, self.out_space)

    __rmul__ = __mul__

    def relabeled(self, in_space: str, out_space: str) -> "ChannelVector":
        return from_block(self.block(), in_space, out_space)

    def allclose(self, other: "ChannelVector", atol: float = 1e-12) -> bool:
        return self.tensor.allclose(other.tensor, atol=atol)


def _check_spaces(a: ChannelVector, b: ChannelVector):
    if (a.in_space, a.out_space) != (b.in_space, b.out_space):
        raise LabelError(f"channel spaces differ: {a.in_space}->{a.out_space} vs {b.in_space}->{b.out_space}")


def _slot_keys(in_space: str, out_space: str):
    return [
        (out_space, False, "up"),
        (in_space, False, "down"),
        (in_space, True, "up"),
        (out_space, True, "down"),
    ]


def from_block(block, in_space: str, out_space: str) -> ChannelVector:
    """Wrap an ``[out, in, in_dagger, out_dagger]`` array as a channel vector."""
    if in_space == out_space:
        raise LabelError("input and output spaces must differ")
    block = np.asarray(block, dtype=complex)
    d_out, d_in = block.shape[0], block.shape[1]
    labels = [
        up(out_space, dim=d_out),
        down(in_space, dim=d_in),
        up(in_space, True, dim=d_in),
        down(out_space, True, dim=d_out),
    ]
    return ChannelVector(LabeledTensor(labels, block), in_space, out_space)


def validate_kraus(kraus: Sequence) -> list[np.ndarray]:
    ops = [np.atleast_2d(np.asarray(k, dtype=complex)) for k in kraus]
    if not ops:
        raise ValueError("Kraus set is empty")
    shape = ops[0].shape
    if any(k.shape != shape or k.ndim != 2 for k in ops):
        raise ValueError(f"inconsistent Kraus operator shapes: {[k.shape for k in ops]}")
    return ops


def kraus_to_channel_vector(kraus: Sequence, in_space: str, out_space: str) -> ChannelVector:
    ops = np.stack(validate_kraus(kraus))
    block = np.einsum("kji,kml->jilm", ops, ops.conj())
    return from_block(block, in_space, out_space)


def kraus_gram(kraus: Sequence) -> np.ndarray:
    """``sum_k A_k^dagger A_k``."""
    return sum(k.conj().T @ k for k in validate_kraus(kraus))


def is_trace_non_increasing(kraus: Sequence, atol: float = TP_ATOL) -> bool:
    return bool(np.linalg.eigvalsh(kraus_gram(kraus)).max() <= 1 + atol)


def kraus_is_trace_preserving(kraus: Sequence, atol: float = TP_ATOL) -> bool:
    gram = kraus_gram(kraus)
    return bool(np.allclose(gram, np.eye(gram.shape[0]), rtol=0, atol=atol))


def identity_up(name: str, dim: int = 2) -> LabeledTensor:
    """Unnormalised identity operator on ``name`` as an upper (state-like) vector."""
    return LabeledTensor([up(name, dim=dim), down(name, True, dim=dim)], np.eye(dim))


def identity_down(name: str, dim: int = 2) -> LabeledTensor:
    """Identity on ``name`` as a lower (effect-like) vector; contracting it with a state takes the trace."""
    return LabeledTensor([down(name, dim=dim), up(name, True, dim=dim)], np.eye(dim))


def density(name: str, rho) -> LabeledTensor:
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    return LabeledTensor([up(name, dim=d), down(name, True, dim=d)], rho)


def effect(name: str, op) -> LabeledTensor:
    """Lower vector for the effect ``op``; ``effect(A, E) . density(A, rho) = tr(E rho)``."""
    op = np.asarray(op, dtype=complex)
    d = op.shape[0]
    # <t|_A (x) |u>^{A dagger} carries E[u, t]
    return LabeledTensor([down(name, dim=d), up(name, True, dim=d)], op.T)


def is_trace_preserving(channel: ChannelVector, atol: float = TP_ATOL) -> bool:
    """True iff tracing the output of ``channel`` gives the identity effect on its input."""
    lhs = bullet(identity_down(channel.out_space, channel.dim_out), channel)
    rhs = identity_down(channel.in_space, channel.dim_in)
    return lhs.allclose(rhs, atol=atol)


def choi_matrix(channel: ChannelVector) -> np.ndarray:
    """Choi matrix ``sum |i><i'| (x) E(|i><i'|)`` ordered (in, out) x (in, out)."""
    blk = channel.block()  # [j, i, i', j']
    d_out, d_in = blk.shape[0], blk.shape[1]
    return np.transpose(blk, (1, 0, 2, 3)).reshape(d_in * d_out, d_in * d_out)


def is_completely_positive(channel: ChannelVector, atol: float = TP_ATOL) -> bool:
    choi = choi_matrix(channel)
    if not np.allclose(choi, choi.conj().T, rtol=0, atol=atol):
        return False
    return bool(np.linalg.eigvalsh(choi).min() >= -atol)


def flip_kraus(dim: int = 2) -> list[np.ndarray]:
    return [np.roll(np.eye(dim), 1, axis=0)]


def replace_kraus(value: int, dim: int = 2) -> list[np.ndarray]:
    ops = []
    for i in range(dim):
        k = np.zeros((dim, dim))
        k[value, i] = 1
        ops.append(k)
    return ops


def extreme_classical_kraus() -> list[list[np.ndarray]]:
    return [[np.eye(2)], flip_kraus(), replace_kraus(0), replace_kraus(1)]


def extreme_classical_channels(in_space: str = "A", out_space: str = "B") -> list[ChannelVector]:
    """Identity, flip, replace-with-0 and replace-with-1 on one bit (in that order)."""
    return [kraus_to_channel_vector(k, in_space, out_space) for k in extreme_classical_kraus()]


def random_kraus(dim_in: int = 2, dim_out: int = 2, n_ops: int = 2, rng=None) -> list[np.ndarray]:
    """Trace-preserving Kraus set cut from a Haar-random isometry."""
    rng = np.random.default_rng(rng)
    n = dim_out * n_ops
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    iso = q[:, :dim_in]
    return [iso[k * dim_out:(k + 1) * dim_out, :] for k in range(n_ops)]


def random_channel(in_space: str, out_space: str, rng=None, n_ops: int = 2) -> ChannelVector:
    return kraus_to_channel_vector(random_kraus(2, 2, n_ops, rng), in_space, out_space)


def random_density(dim: int = 2, rng=None, rank: int | None = None) -> np.ndarray:
    rng = np.random.default_rng(rng)
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def apply_kraus(kraus: Sequence, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return sum(k @ rho @ k.conj().T for k in validate_kraus(kraus))


def dephase(rho) -> np.ndarray:
    """z-basis measurement with the outcome discarded."""
    return np.diag(np.diag(np.asarray(rho, dtype=complex)))


def sandwich_to_stochastic(kraus: Sequence) -> np.ndarray:
    """Classical transition matrix of ``dephase . E . dephase``.

    ``q[j, i] = sum_k |<j|A_k|i>|^2``; columns sum to one when the Kraus set is
    trace preserving.
    """
    ops = np.stack(validate_kraus(kraus))
    return np.sum(np.abs(ops) ** 2, axis=0)


def is_column_stochastic(q, atol: float = TP_ATOL) -> bool:
    q = np.asarray(q)
    return bool((q >= -atol).all() and np.allclose(q.sum(axis=0), 1.0, rtol=0, atol=atol))


def kraus_to_json(kraus: Sequence) -> dict:
    ops = validate_kraus(kraus)
    return {
        "dim_in": ops[0].shape[1],
        "dim_out": ops[0].shape[0],
        "operators": [[[float(z.real), float(z.imag)] for z in k.reshape(-1)] for k in ops],
    }


def kraus_from_json(obj: Mapping) -> list[np.ndarray]:
    try:
        d_in, d_out = int(obj["dim_in"]), int(obj["dim_out"])
        ops = [
            np.array([complex(re, im) for re, im in flat], dtype=complex).reshape(d_out, d_in)
            for flat in obj["operators"]
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed Kraus JSON: {exc}") from exc
    return validate_kraus(ops)
