import numpy as np
import pytest

from cpk import channels as ch
from cpk import twotime as tt
from cpk.tensor import LabeledTensor, bullet, down, tensor_all, up

X = np.array([[0, 1], [1, 0]])
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1, -1])


def written_out(terms, in_space="A", out_space="B"):
    """Sum of |j>^out (x) <i|_in (x) |i'>^{in dagger} (x) <j'|_{out dagger} for (j, i, i', j') terms."""
    total = None
    for j, i, ip, jp in terms:
        parts = []
        for name, dagger, var, idx in (
            (out_space, False, "up", j), (in_space, False, "down", i),
            (in_space, True, "up", ip), (out_space, True, "down", jp),
        ):
            v = np.zeros(2)
            v[idx] = 1
            parts.append(LabeledTensor([up(name, dagger) if var == "up" else down(name, dagger)], v))
        t = tensor_all(parts)
        total = t if total is None else total + t
    return total


def test_identity_channel_passes_states_through():
    ident = ch.kraus_to_channel_vector([np.eye(2)], "A", "B")
    rho = ch.random_density(2, 7)
    out = bullet(ch.density("A", rho), ident)
    assert out.allclose(ch.density("B", rho))


def test_flip_matches_written_out_form():
    flip = ch.kraus_to_channel_vector([X], "A", "B")
    # X|i> = |1-i>, so both populations and coherences appear
    expected = written_out([(1 - i, i, ip, 1 - ip) for i in (0, 1) for ip in (0, 1)])
    assert flip.tensor.allclose(expected)


def test_z_measurement_channel_matches_protocol_elements():
    dephase = ch.kraus_to_channel_vector([np.diag([1, 0]), np.diag([0, 1])], "A", "B")
    # M(a|0) = |a>^out <a|_in |a>^{in+} <a|_{out+}
    expected = written_out([(a, a, a, a) for a in (0, 1)])
    assert dephase.tensor.allclose(expected)
    assert dephase.allclose(tt.link("M", "A", "B"))


def test_trace_preservation():
    inst = tt.build_measurement_instrument("A")
    assert ch.is_trace_preserving(ch.kraus_to_channel_vector([np.eye(2)], "A", "B"))
    assert not ch.is_trace_preserving(inst.elements[(0, 0)])
    assert ch.is_trace_preserving(inst.channel(0))
    assert ch.is_trace_preserving(inst.channel(1))


def test_extreme_classical_channels():
    chans = ch.extreme_classical_channels("A_i", "A_o")
    assert len(chans) == 4
    assert all(ch.is_trace_preserving(c) for c in chans)
    replace0 = chans[2]
    expected = tensor_all([ch.identity_down("A_i"), ch.density("A_o", np.diag([1, 0]))])
    assert replace0.tensor.allclose(expected)


def test_extreme_channels_are_all_bit_functions():
    funcs = set()
    for kraus in ch.extreme_classical_kraus():
        q = ch.sandwich_to_stochastic(kraus)
        assert set(np.unique(q)) <= {0.0, 1.0}
        funcs.add(tuple(int(np.argmax(q[:, i])) for i in range(2)))
    assert funcs == {(0, 1), (1, 0), (0, 0), (1, 1)}


def test_sandwich_identity_and_flip():
    assert np.array_equal(ch.sandwich_to_stochastic([np.eye(2)]), np.eye(2))
    assert np.array_equal(ch.sandwich_to_stochastic([X]), X)


def test_sandwich_depolarizing_is_uniform():
    q = ch.sandwich_to_stochastic([np.eye(2) / 2, X / 2, Y / 2, Z / 2])
    # I, Z give |<i|.|i>|^2 = 1/4 each; X, Y give |<j|.|i>|^2 = 1/4 each for j != i
    assert np.allclose(q, 0.5, atol=1e-15)


def test_sandwich_columns_not_rows_sum_to_one():
    # replace-with-0 is not unital: columns of q sum to 1, rows do not
    q = ch.sandwich_to_stochastic(ch.replace_kraus(0))
    assert np.allclose(q.sum(axis=0), 1)
    assert not np.allclose(q.sum(axis=1), 1)


def test_random_kraus_trace_preserving():
    rng = np.random.default_rng(5)
    for n_ops in (1, 2, 3):
        kraus = ch.random_kraus(2, 2, n_ops, rng)
        assert ch.kraus_is_trace_preserving(kraus)
        assert ch.is_trace_preserving(ch.kraus_to_channel_vector(kraus, "A", "B"))


@pytest.mark.parametrize("seed", range(20))
def test_random_channels_sandwich_and_choi(seed):
    rng = np.random.default_rng(seed)
    kraus = ch.random_kraus(2, 2, int(rng.integers(1, 5)), rng)
    q = ch.sandwich_to_stochastic(kraus)
    assert ch.is_column_stochastic(q, 1e-10)
    rho = ch.random_density(2, rng)
    lhs = ch.dephase(ch.apply_kraus(kraus, ch.dephase(rho)))
    rhs = np.diag(q @ np.diag(rho).real)
    assert np.allclose(lhs, rhs, rtol=0, atol=1e-10)
    cv = ch.kraus_to_channel_vector(kraus, "A", "B")
    assert np.linalg.eigvalsh(ch.choi_matrix(cv)).min() >= -1e-10
    assert ch.is_completely_positive(cv)


def test_channel_vector_action_matches_kraus_sum():
    rng = np.random.default_rng(11)
    kraus = ch.random_kraus(2, 2, 3, rng)
    rho = ch.random_density(2, rng)
    out = bullet(ch.density("A", rho), ch.kraus_to_channel_vector(kraus, "A", "B"))
    assert out.allclose(ch.density("B", ch.apply_kraus(kraus, rho)))


def test_trace_non_increasing():
    assert ch.is_trace_non_increasing([np.diag([1, 0])])
    assert not ch.is_trace_non_increasing([2 * np.eye(2)])


def test_bad_kraus_shapes():
    with pytest.raises(ValueError):
        ch.kraus_to_channel_vector([np.eye(2), np.eye(3)], "A", "B")
    with pytest.raises(ValueError):
        ch.kraus_to_channel_vector([], "A", "B")


def test_kraus_json_round_trip():
    kraus = ch.random_kraus(2, 2, 2, 1)
    back = ch.kraus_from_json(ch.kraus_to_json(kraus))
    assert all(np.array_equal(a, b) for a, b in zip(kraus, back))
