"""Linear two-time states, the protocol instruments and the checks run on them.

Party ``P`` owns an input space ``P_i`` and an output space ``P_o``.  A state
over parties carries ``P_i`` upper (ket raised, dagger lowered) and ``P_o``
lower, so a product of per-party channels ``P_i -> P_o`` contracts it to a
scalar.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import channels as ch
from .polytope.table import ProbTable
from .tensor import LabeledTensor, LabelError, bullet, down, relabel, tensor_all, up

LINEARITY_ATOL = 1e-9
SNAP_ATOL = 1e-9
SNAP_MAX_DEN = 2**20
PROB_ATOL = 1e-10
DEFAULT_SAMPLES = 32
DEFAULT_SEED = 0


class SnappingError(ValueError):
    """A probability is not close to any small-denominator rational."""


class NormalizationError(ValueError):
    """Probabilities for some input setting do not sum to one."""


class NotLinearError(ValueError):
    """The state does not contract to a constant on trace-preserving channels."""


def in_space(party: str) -> str:
    return f"{party}_i"


def out_space(party: str) -> str:
    return f"{party}_o"


@dataclass(frozen=True)
class TwoTimeState:
    tensor: LabeledTensor
    parties: tuple[str, ...]

    def __post_init__(self):
        expected = set()
        for p in self.parties:
            expected |= {
                (in_space(p), False, "up"), (in_space(p), True, "down"),
                (out_space(p), False, "down"), (out_space(p), True, "up"),
            }
        if set(self.tensor.keys) != expected:
            raise LabelError(
                f"state labels {sorted(self.tensor.keys)} do not form in/out pairs for parties {self.parties}"
            )

    def __mul__(self, factor) -> "TwoTimeState":
        return TwoTimeState(self.tensor * factor, self.parties)

    __rmul__ = __mul__

    def __truediv__(self, factor) -> "TwoTimeState":
        return TwoTimeState(self.tensor / factor, self.parties)

    def __add__(self, other: "TwoTimeState") -> "TwoTimeState":
        return TwoTimeState(self.tensor + other.tensor, self.parties)


def infer_parties(t: LabeledTensor) -> tuple[str, ...]:
    names = {lab.name for lab in t.labels}
    parties = sorted({n[:-2] for n in names if n.endswith(("_i", "_o"))})
    if any(not n.endswith(("_i", "_o")) for n in names):
        raise LabelError(f"state space names must end in _i or _o, got {sorted(names)}")
    return tuple(parties)


def state_from_tensor(t: LabeledTensor) -> TwoTimeState:
    return TwoTimeState(t, infer_parties(t))


def is_hermitian(state: TwoTimeState, atol: float = 1e-12) -> bool:
    """Invariance under swapping every space with its dagger copy plus complex conjugation."""
    return bool(np.allclose(state_matrix(state), state_matrix(state).conj().T, rtol=0, atol=atol))


def state_matrix(state: TwoTimeState) -> np.ndarray:
    """Reshape into a square matrix: rows are non-dagger slots, columns dagger slots.

    Per party the row index is (input, output) and so is the column index; this
    is the process-matrix ordering.
    """
    rows, cols = [], []
    for p in state.parties:
        rows += [(in_space(p), False, "up"), (out_space(p), False, "down")]
        cols += [(in_space(p), True, "down"), (out_space(p), True, "up")]
    arr = state.tensor.to_array(rows + cols)
    n = int(np.prod(arr.shape[: len(rows)], dtype=int))
    return arr.reshape(n, n)


def state_from_matrix(matrix, parties: Sequence[str], dims: Sequence[tuple[int, int]]) -> TwoTimeState:
    """Inverse of :func:`state_matrix`; ``dims`` lists (dim_in, dim_out) per party."""
    labels_rows, labels_cols, shape_rows = [], [], []
    for p, (d_in, d_out) in zip(parties, dims):
        labels_rows += [up(in_space(p), dim=d_in), down(out_space(p), dim=d_out)]
        labels_cols += [down(in_space(p), True, dim=d_in), up(out_space(p), True, dim=d_out)]
        shape_rows += [d_in, d_out]
    data = np.asarray(matrix, dtype=complex).reshape(shape_rows + shape_rows)
    return TwoTimeState(LabeledTensor(labels_rows + labels_cols, data), tuple(parties))


def is_positive(state: TwoTimeState, atol: float = 1e-10) -> bool:
    m = state_matrix(state)
    if not np.allclose(m, m.conj().T, rtol=0, atol=atol):
        return False
    return bool(np.linalg.eigvalsh(m).min() >= -atol)


# --- instruments ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class Instrument:
    """CP maps ``elements[(outcome, input)]`` from ``P_i`` to ``P_o``."""

    party: str
    elements: Mapping[tuple[int, int], ch.ChannelVector]

    @property
    def outcomes(self) -> list[int]:
        return sorted({a for a, _ in self.elements})

    @property
    def inputs(self) -> list[int]:
        return sorted({x for _, x in self.elements})

    def channel(self, x: int) -> ch.ChannelVector:
        """Outcome-summed channel for input ``x``."""
        terms = [self.elements[(a, x)] for a in self.outcomes]
        out = terms[0]
        for t in terms[1:]:
            out = out + t
        return out

    def is_valid(self, atol: float = ch.TP_ATOL) -> bool:
        return all(ch.is_completely_positive(m, atol) for m in self.elements.values()) and all(
            ch.is_trace_preserving(self.channel(x), atol) for x in self.inputs
        )


def measurement_kraus(a: int, x: int) -> list[np.ndarray]:
    """z-measurement with outcome ``a`` followed by preparing ``|a xor x>``."""
    k = np.zeros((2, 2))
    k[a ^ x, a] = 1
    return [k]


def build_measurement_instrument(party: str) -> Instrument:
    elements = {
        (a, x): ch.kraus_to_channel_vector(measurement_kraus(a, x), in_space(party), out_space(party))
        for a in (0, 1)
        for x in (0, 1)
    }
    return Instrument(party, elements)


def instrument_from_kraus(party: str, kraus: Mapping[tuple[int, int], Sequence]) -> Instrument:
    return Instrument(
        party,
        {key: ch.kraus_to_channel_vector(k, in_space(party), out_space(party)) for key, k in kraus.items()},
    )


def link(kind: str, src: str, dst: str) -> ch.ChannelVector:
    """Wire between parties: ``"M"`` (measure) or ``"Mbar"`` (measure then flip)."""
    x = {"M": 0, "Mbar": 1}[kind]
    return build_measurement_instrument("_").channel(x).relabeled(src, dst)


def cyclic_wiring(parties: Sequence[str]) -> list[tuple[str, str]]:
    n = len(parties)
    return [(out_space(parties[k]), in_space(parties[(k + 1) % n])) for k in range(n)]


def build_eta(parties: Sequence[str] = ("A", "B", "C")) -> TwoTimeState:
    """Half the all-``M`` cyclic wiring plus half the all-``Mbar`` wiring."""
    parties = tuple(parties)
    wires = cyclic_wiring(parties)
    plain = tensor_all(link("M", s, d) for s, d in wires)
    flipped = tensor_all(link("Mbar", s, d) for s, d in wires)
    return TwoTimeState((plain + flipped) * 0.5, parties)


def build_loop(kind: str = "M", parties: Sequence[str] = ("A", "B", "C")) -> TwoTimeState:
    """A single unmixed cyclic wiring (not a linear two-time state)."""
    parties = tuple(parties)
    return TwoTimeState(tensor_all(link(kind, s, d) for s, d in cyclic_wiring(parties)), parties)


def protocol_instruments(parties: Sequence[str] = ("A", "B", "C")) -> dict[str, Instrument]:
    return {p: build_measurement_instrument(p) for p in parties}


# --- probabilities -------------------------------------------------------------------------------


def contract_with(state: TwoTimeState, ops: Sequence) -> LabeledTensor:
    out = state.tensor
    for op in ops:
        out = bullet(op, out)
    return out


def probability(
    state: TwoTimeState,
    instruments: Mapping[str, Instrument],
    outcomes: Sequence[int],
    inputs: Sequence[int],
) -> float:
    """``(J(a|x) (x) K(b|y) (x) ...) . state`` for outcomes/inputs in party order."""
    ops = [instruments[p].elements[(a, x)] for p, a, x in zip(state.parties, outcomes, inputs)]
    res = contract_with(state, ops)
    if res.rank:
        raise LabelError(f"instruments leave uncontracted labels {res.keys}")
    value = res.item()
    if abs(value.imag) > PROB_ATOL or not (-PROB_ATOL <= value.real <= 1 + PROB_ATOL):
        raise ValueError(f"probability {value} for outcomes {tuple(outcomes)} | inputs {tuple(inputs)} is invalid")
    return min(max(value.real, 0.0), 1.0)


def snap(value: float, max_den: int = SNAP_MAX_DEN, atol: float = SNAP_ATOL) -> Fraction:
    frac = Fraction(value).limit_denominator(max_den)
    if abs(float(frac) - value) > atol:
        raise SnappingError(f"{value!r} has no rational within {atol} with denominator <= {max_den}")
    return frac


def raw_table(state: TwoTimeState, instruments: Mapping[str, Instrument]) -> dict:
    """Floating probabilities keyed by (outcomes, inputs)."""
    n = len(state.parties)
    out = {}
    for inputs in itertools.product((0, 1), repeat=n):
        for outcomes in itertools.product((0, 1), repeat=n):
            out[(outcomes, inputs)] = probability(state, instruments, outcomes, inputs)
    return out


def full_table(state: TwoTimeState, instruments: Mapping[str, Instrument]) -> ProbTable:
    """All binary-input/output probabilities, snapped to exact rationals."""
    n = len(state.parties)
    raw = raw_table(state, instruments)
    entries = {key: snap(v) for key, v in raw.items()}
    for inputs in itertools.product((0, 1), repeat=n):
        total = sum(entries[(o, inputs)] for o in itertools.product((0, 1), repeat=n))
        if total != 1:
            raise NormalizationError(f"probabilities for inputs {inputs} sum to {total}, not 1")
    return ProbTable.from_mapping(n, entries)


def closed_form_probability(a: int, b: int, c: int, x: int, y: int, z: int) -> Fraction:
    """Half the sum of the two consistent-loop indicator products."""
    first = (b == a ^ x) and (c == b ^ y) and (a == c ^ z)
    second = (b == a ^ x ^ 1) and (c == b ^ y ^ 1) and (a == c ^ z ^ 1)
    return Fraction(int(first) + int(second), 2)


def closed_form_table() -> ProbTable:
    entries = {
        ((a, b, c), (x, y, z)): closed_form_probability(a, b, c, x, y, z)
        for a, b, c, x, y, z in itertools.product((0, 1), repeat=6)
    }
    return ProbTable.from_mapping(3, entries)


# --- linearity -----------------------------------------------------------------------------------


@dataclass
class LinearityReport:
    passed: bool
    worst_deviation: float
    n_checked: int
    values: list[complex] = field(default_factory=list, repr=False)
    failures: list[tuple] = field(default_factory=list)

    def __bool__(self):
        return self.passed


def _party_channels(party: str, kraus_sets) -> list[ch.ChannelVector]:
    return [ch.kraus_to_channel_vector(k, in_space(party), out_space(party)) for k in kraus_sets]


def channel_samples(parties: Sequence[str], n_random: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED):
    """Extreme-classical products first, then ``n_random`` seeded random CPTP products.

    Yields ``(tag, [channel per party])``.
    """
    extremes = ch.extreme_classical_kraus()
    per_party = {p: _party_channels(p, extremes) for p in parties}
    for combo in itertools.product(range(len(extremes)), repeat=len(parties)):
        yield tuple(ch.EXTREME_NAMES[k] for k in combo), [per_party[p][k] for p, k in zip(parties, combo)]
    rng = np.random.default_rng(seed)
    for r in range(n_random):
        yield ("random", r), [ch.random_channel(in_space(p), out_space(p), rng) for p in parties]


def contraction_values(state: TwoTimeState, n_random: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED):
    out = []
    for tag, chans in channel_samples(state.parties, n_random, seed):
        out.append((tag, contract_with(state, chans).item()))
    return out


def verify_linearity(
    state: TwoTimeState,
    n_random: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    atol: float = LINEARITY_ATOL,
) -> LinearityReport:
    """Check ``(J (x) K (x) ...) . state == 1`` on extreme classical and random channels."""
    values = contraction_values(state, n_random, seed)
    devs = [(tag, abs(v - 1)) for tag, v in values]
    failures = [(tag, v) for (tag, v), (_, d) in zip(values, devs) if d > atol]
    worst = float(max(d for _, d in devs))
    return LinearityReport(not failures, worst, len(values), [v for _, v in values], failures)


def normalize_twotime(
    state: TwoTimeState,
    n_random: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    atol: float = LINEARITY_ATOL,
) -> TwoTimeState:
    values = [v for _, v in contraction_values(state, n_random, seed)]
    c = values[0]
    if abs(c) <= atol or any(abs(v - c) > atol for v in values):
        spread = max(abs(v - c) for v in values)
        raise NotLinearError(f"contraction with trace-preserving channels is not a nonzero constant (spread {spread:.3g})")
    return state / c


# --- single-party marginals ----------------------------------------------------------------------


@dataclass
class MarginalReport:
    holds: bool
    worst_deviation: float
    rhos: list[np.ndarray] = field(default_factory=list, repr=False)

    def __bool__(self):
        return self.holds


def marginal_residual(state: TwoTimeState, party: str, chans: Mapping[str, ch.ChannelVector]) -> np.ndarray:
    """Contract every other party; returns ``R[i, i', o, o']`` for ``party``."""
    rest = contract_with(state, [chans[p] for p in state.parties if p != party])
    order = [
        (in_space(party), False, "up"), (in_space(party), True, "down"),
        (out_space(party), False, "down"), (out_space(party), True, "up"),
    ]
    return rest.to_array(order)


def split_marginal(residual: np.ndarray, atol: float = LINEARITY_ATOL):
    """Return ``(rho, deviation)`` for the best ``rho (x) I_out`` fit of ``R[i, i', o, o']``."""
    d_out = residual.shape[2]
    rho = np.einsum("abcc->ab", residual) / d_out
    fitted = np.einsum("ab,cd->abcd", rho, np.eye(d_out))
    return rho, float(np.abs(residual - fitted).max())


def marginal_report(
    state: TwoTimeState,
    party: str,
    n_random: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    atol: float = LINEARITY_ATOL,
) -> MarginalReport:
    others = [p for p in state.parties if p != party]
    holds, worst, rhos = True, 0.0, []
    for _, chans in channel_samples(others, n_random, seed):
        residual = marginal_residual(state, party, dict(zip(others, chans)))
        rho, dev = split_marginal(residual)
        herm = float(np.abs(rho - rho.conj().T).max())
        eig_min = float(np.linalg.eigvalsh((rho + rho.conj().T) / 2).min())
        dev = max(dev, herm, abs(np.trace(rho) - 1), max(0.0, -eig_min))
        worst = max(worst, dev)
        holds = holds and bool(dev <= atol)
        rhos.append(rho)
    return MarginalReport(holds, float(worst), rhos)


def marginal_form_check(state: TwoTimeState, party: str, n_random: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED) -> bool:
    return marginal_report(state, party, n_random, seed).holds


def protocol_marginals(
    state: TwoTimeState,
    party: str,
    instruments: Mapping[str, Instrument] | None = None,
) -> dict[tuple[int, ...], MarginalReport]:
    """Marginal of ``party`` when every other party runs its instrument with outcomes summed.

    Keyed by the other parties' inputs. For the cyclic protocol each ``rho`` is ``I/2``.
    """
    instruments = instruments or protocol_instruments(state.parties)
    others = [p for p in state.parties if p != party]
    out = {}
    for inputs in itertools.product(*(instruments[p].inputs for p in others)):
        chans = {p: instruments[p].channel(x) for p, x in zip(others, inputs)}
        rho, dev = split_marginal(marginal_residual(state, party, chans))
        out[inputs] = MarginalReport(bool(dev <= LINEARITY_ATOL), dev, [rho])
    return out


def post_selected_state(party: str = "A", prepared: int = 0, post: int = 0) -> TwoTimeState:
    """Prepare ``|prepared>`` into the input and post-select ``<post|`` on the output."""
    rho_in = np.zeros((2, 2))
    rho_in[prepared, prepared] = 1
    proj = np.zeros((2, 2))
    proj[post, post] = 1
    t = tensor_all([ch.density(in_space(party), rho_in), ch.effect(out_space(party), proj)])
    return TwoTimeState(t, (party,))


def relabel_state(state: TwoTimeState, mapping: Mapping[str, str]) -> TwoTimeState:
    names = {}
    for p in state.parties:
        q = mapping.get(p, p)
        names[in_space(p)] = in_space(q)
        names[out_space(p)] = out_space(q)
    return TwoTimeState(relabel(state.tensor, names), tuple(mapping.get(p, p) for p in state.parties))

