"""Process matrices, their Born rule, and the isomorphism with linear two-time states.

A process matrix acts on ``(x)_i (A^i_in (x) A^i_out)`` with subsystems in
party order, input before output.  Instrument elements enter the trace as
transposed Choi matrices built in the computational basis.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import channels as ch
from . import twotime as tt

PSD_ATOL = 1e-10
PROB_ATOL = 1e-9


@dataclass(frozen=True)
class ProcessMatrix:
    matrix: np.ndarray
    dims: tuple[tuple[int, int], ...]  # (dim_in, dim_out) per party

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n = int(np.prod([a * b for a, b in self.dims], dtype=int))
        if m.shape != (n, n):
            raise ValueError(f"matrix shape {m.shape} does not match party dims {self.dims}")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", tuple(tuple(d) for d in self.dims))

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    def is_hermitian(self, atol: float = PSD_ATOL) -> bool:
        return bool(np.allclose(self.matrix, self.matrix.conj().T, rtol=0, atol=atol))

    def is_positive(self, atol: float = PSD_ATOL) -> bool:
        return self.is_hermitian(atol) and bool(np.linalg.eigvalsh(self.matrix).min() >= -atol)


def choi_operator(kraus: Sequence) -> np.ndarray:
    """``sum_mu (I (x) E_mu)|Phi+><Phi+|(I (x) E_mu^dagger)`` with unnormalised ``|Phi+> = sum_t |tt>``."""
    ops = ch.validate_kraus(kraus)
    d_out, d_in = ops[0].shape
    choi = np.zeros((d_in * d_out, d_in * d_out), dtype=complex)
    for e in ops:
        vec = np.zeros(d_in * d_out, dtype=complex)
        for t in range(d_in):
            vec += np.kron(np.eye(d_in)[t], e[:, t])
        choi += np.outer(vec, vec.conj())
    return choi


def pm_probability(W: ProcessMatrix, instruments: Sequence[Mapping[int, Sequence]], outcomes: Sequence[int]) -> float:
    """``tr[W (x)_i M_{a_i}]`` where ``instruments[i][a]`` is the Kraus set of party i's outcome a."""
    if len(instruments) != W.n_parties or len(outcomes) != W.n_parties:
        raise ValueError("need one instrument and one outcome per party")
    op = np.ones((1, 1), dtype=complex)
    for (d_in, d_out), inst, a in zip(W.dims, instruments, outcomes):
        m = choi_operator(inst[a]).T
        if m.shape != (d_in * d_out, d_in * d_out):
            raise ValueError(f"instrument dims {m.shape} do not match party dims {(d_in, d_out)}")
        op = np.kron(op, m)
    value = np.trace(W.matrix @ op)
    if abs(value.imag) > PROB_ATOL or not (-PROB_ATOL <= value.real <= 1 + PROB_ATOL):
        raise ValueError(f"probability {value} outside [0, 1]; process or instrument invalid")
    return float(value.real)


def pm_to_twotime(W: ProcessMatrix, parties: Sequence[str] | None = None) -> tt.TwoTimeState:
    """Read W's row index as the ket slots and its column index as the dagger slots."""
    parties = tuple(parties) if parties is not None else _default_parties(W.n_parties)
    return tt.state_from_matrix(W.matrix, parties, W.dims)


def twotime_to_pm(state: tt.TwoTimeState) -> ProcessMatrix:
    dims = []
    for p in state.parties:
        t = state.tensor
        d_in = t.labels[t.axis((tt.in_space(p), False, "up"))].dim
        d_out = t.labels[t.axis((tt.out_space(p), False, "down"))].dim
        dims.append((d_in, d_out))
    return ProcessMatrix(tt.state_matrix(state), tuple(dims))


def _default_parties(n: int) -> tuple[str, ...]:
    return tuple("ABCDEF"[:n])


def instrument_to_twotime(party: str, kraus_by_outcome: Mapping[int, Sequence]) -> tt.Instrument:
    """Single-input instrument (input index 0) in two-time vector form."""
    return tt.instrument_from_kraus(party, {(a, 0): k for a, k in kraus_by_outcome.items()})


# --- random causal circuits ----------------------------------------------------------------------


def _permute_subsystems(matrix: np.ndarray, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors so that new factor k is old factor ``order[k]``."""
    n = len(dims)
    t = matrix.reshape(list(dims) * 2)
    perm = list(order) + [n + k for k in order]
    size = int(np.prod(dims))
    return np.transpose(t, perm).reshape(size, size)


def causal_chain_process(rho, link_kraus: Sequence[Sequence], order: Sequence[int], n_parties: int) -> ProcessMatrix:
    """Qubit process of a fixed-order chain: ``rho`` into the first party, channels between consecutive parties.

    ``link_kraus[k]`` carries the output of party ``order[k]`` to the input of ``order[k+1]``;
    the last party's output is traced out.
    """
    factors = [np.asarray(rho, dtype=complex)]
    for kraus in link_kraus:
        factors.append(choi_operator(kraus))
    factors.append(np.eye(2, dtype=complex))
    m = factors[0]
    for f in factors[1:]:
        m = np.kron(m, f)
    # factors are in chain order: in(o0), out(o0), in(o1), out(o1), ...
    chain_slots = []
    for p in order:
        chain_slots += [2 * p, 2 * p + 1]
    target = [chain_slots.index(s) for s in range(2 * n_parties)]
    return ProcessMatrix(_permute_subsystems(m, [2] * (2 * n_parties), target), ((2, 2),) * n_parties)


@dataclass
class CausalCircuit:
    """Mixture of fixed-order chains; ``components`` holds (weight, rho, link Kraus sets, order)."""

    n_parties: int
    components: list

    def process(self) -> ProcessMatrix:
        total = None
        for w, rho, links, order in self.components:
            m = w * causal_chain_process(rho, links, order, self.n_parties).matrix
            total = m if total is None else total + m
        return ProcessMatrix(total, ((2, 2),) * self.n_parties)

    def simulate(self, instruments: Sequence[Mapping[int, Sequence]], outcomes: Sequence[int]) -> float:
        """Direct Kraus-level simulation, independent of W."""
        total = 0.0
        for w, rho, links, order in self.components:
            branch = np.asarray(rho, dtype=complex)
            for k, p in enumerate(order):
                branch = ch.apply_kraus(instruments[p][outcomes[p]], branch)
                if k < len(links):
                    branch = ch.apply_kraus(links[k], branch)
            total += w * np.trace(branch).real
        return float(total)


def random_causal_circuit(n_parties: int = 2, rng=None, n_orders: int = 2) -> CausalCircuit:
    rng = np.random.default_rng(rng)
    weights = rng.dirichlet(np.ones(n_orders))
    comps = []
    for w in weights:
        order = list(rng.permutation(n_parties))
        rho = ch.random_density(2, rng)
        links = [ch.random_kraus(2, 2, int(rng.integers(1, 4)), rng) for _ in range(n_parties - 1)]
        comps.append((float(w), rho, links, order))
    return CausalCircuit(n_parties, comps)


def random_instrument(rng=None, n_outcomes: int = 2) -> dict[int, list[np.ndarray]]:
    """Outcome-indexed Kraus sets whose sum is trace preserving."""
    rng = np.random.default_rng(rng)
    ops = ch.random_kraus(2, 2, 2 * n_outcomes, rng)
    return {a: ops[2 * a:2 * a + 2] for a in range(n_outcomes)}


def equivalence_gap(W: ProcessMatrix, instruments: Sequence[Mapping[int, Sequence]]) -> float:
    """Largest gap between the trace rule and the two-time contraction over all outcomes."""
    parties = _default_parties(W.n_parties)
    state = pm_to_twotime(W, parties)
    tt_inst = {p: instrument_to_twotime(p, inst) for p, inst in zip(parties, instruments)}
    worst = 0.0
    for outs in itertools.product(*[sorted(inst) for inst in instruments]):
        p_pm = pm_probability(W, instruments, outs)
        p_tt = tt.probability(state, tt_inst, outs, [0] * W.n_parties)
        worst = max(worst, abs(p_pm - p_tt))
    return worst


def to_json(W: ProcessMatrix) -> dict:
    return {
        "parties": [{"dim_in": a, "dim_out": b} for a, b in W.dims],
        "matrix": [[float(z.real), float(z.imag)] for z in W.matrix.reshape(-1)],
    }


def from_json(obj: Mapping) -> ProcessMatrix:
    try:
        dims = tuple((int(p["dim_in"]), int(p["dim_out"])) for p in obj["parties"])
        flat = np.array([complex(re, im) for re, im in obj["matrix"]], dtype=complex)
        n = int(np.prod([a * b for a, b in dims], dtype=int))
        return ProcessMatrix(flat.reshape(n, n), dims)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed process-matrix JSON: {exc}") from exc
