import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpk import channels as ch
from cpk import tensor as tn
from cpk import twotime as tt
from cpk.tensor import LabeledTensor, LabelError, bra, bullet, down, ket, relabel, tensor, up


def random_tensor(rng, labels):
    shape = [lab.dim for lab in labels]
    return LabeledTensor(labels, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def test_inner_product_of_equal_basis_states():
    assert bullet(bra("A", 0), ket("A", 0)).item() == 1


def test_orthogonal_basis_states():
    assert bullet(bra("A", 0), ket("A", 1)).item() == 0


def test_dephasing_links_compose():
    m_ab = tt.link("M", "A", "B")
    m_bc = tt.link("M", "B", "C")
    assert bullet(m_ab, m_bc).allclose(tt.link("M", "A", "C").tensor)


def test_scalar_result_is_rank_zero():
    out = bullet(bra("A", 1), ket("A", 1))
    assert out.rank == 0 and out.labels == ()


def test_tensor_of_basis_states():
    t = tensor(ket("A", 0), ket("B", 1))
    expected = np.zeros((2, 2))
    expected[0, 1] = 1
    assert np.array_equal(t.data, expected)


def test_scalar_tensor_scales():
    t = ket("A", 1) * 3.0
    assert tensor(LabeledTensor.scalar(2.0), t).allclose(t * 2)


def test_outcome_elements_sum_to_link():
    inst = tt.build_measurement_instrument("A")
    total = inst.elements[(0, 0)].tensor + inst.elements[(1, 0)].tensor
    assert total.allclose(tt.link("M", "A_i", "A_o").tensor)


def test_relabel_identity_and_rename():
    m = tt.link("M", "A", "B")
    assert relabel(m, {}).allclose(m.tensor)
    assert relabel(m, {"B": "C"}).allclose(tt.link("M", "A", "C").tensor)


def test_relabel_collision():
    t = tensor(ket("A", 0), ket("B", 0))
    with pytest.raises(LabelError):
        relabel(t, {"A": "B"})


def test_cyclic_wiring_closes_to_scalar():
    link = tt.link("M", "X", "Y")
    wires = [("A_o", "B_i"), ("B_o", "C_i"), ("C_o", "A_i")]
    loop = [relabel(link, {"X": s, "Y": d}) for s, d in wires]
    parties = [ch.kraus_to_channel_vector([np.eye(2)], f"{p}_i", f"{p}_o") for p in "ABC"]
    out = tn.contract_all(loop + parties)
    assert out.rank == 0
    # a closed loop of dephased wires admits one consistent bit value per basis state
    assert out.item() == pytest.approx(2.0)


def test_canonical_order_independent_of_construction():
    rng = np.random.default_rng(0)
    data = rng.standard_normal((2, 3))
    a = LabeledTensor([up("A"), down("B", dim=3)], data)
    b = LabeledTensor([down("B", dim=3), up("A")], data.T)
    assert a.labels == b.labels
    assert np.array_equal(a.data, b.data)


def test_same_variance_collision():
    with pytest.raises(LabelError, match="collision"):
        bullet(ket("A", 0), ket("A", 1))


def test_dimension_mismatch():
    with pytest.raises(LabelError, match="dimension"):
        bullet(bra("A", 0, dim=3), ket("A", 0))


def test_duplicate_labels_rejected():
    with pytest.raises(LabelError):
        LabeledTensor([up("A"), up("A")], np.zeros((2, 2)))


def test_tensor_rejects_shared_space():
    with pytest.raises(LabelError):
        tensor(ket("A", 0), bra("A", 0))


def test_data_size_checked():
    with pytest.raises(LabelError):
        LabeledTensor([up("A")], np.zeros(3))


def test_immutable():
    t = ket("A", 0)
    with pytest.raises(AttributeError):
        t.data = None
    with pytest.raises(ValueError):
        t.data[0] = 5


def test_json_round_trip():
    rng = np.random.default_rng(3)
    t = random_tensor(rng, [up("A"), down("A", True), down("B", dim=3)])
    back = tn.from_json(tn.to_json(t))
    assert back.labels == t.labels
    assert np.array_equal(back.data, t.data)


seeds = st.integers(min_value=0, max_value=2**32 - 1)


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(-3, 3), st.floats(-3, 3))
def test_bullet_is_bilinear(seed, alpha, beta):
    rng = np.random.default_rng(seed)
    la = [up("A"), down("B"), up("C", True)]
    lb = [down("A"), up("B"), up("D")]
    a1, a2, b = random_tensor(rng, la), random_tensor(rng, la), random_tensor(rng, lb)
    lhs = bullet(a1 * alpha + a2 * beta, b)
    rhs = bullet(a1, b) * alpha + bullet(a2, b) * beta
    assert lhs.allclose(rhs, atol=1e-12 * (1 + np.abs(lhs.data).max()))


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_disjoint_bullet_is_tensor(seed):
    rng = np.random.default_rng(seed)
    a = random_tensor(rng, [up("A"), down("B")])
    b = random_tensor(rng, [up("C", True)])
    assert bullet(a, b).allclose(tensor(a, b))


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_contraction_chain_is_associative(seed):
    rng = np.random.default_rng(seed)
    a = random_tensor(rng, [up("A"), down("B", True)])
    b = random_tensor(rng, [down("A"), up("C")])
    c = random_tensor(rng, [down("C"), up("B", True), up("D")])
    left = bullet(bullet(a, b), c)
    right = bullet(a, bullet(b, c))
    assert left.allclose(right, atol=1e-12 * (1 + np.abs(left.data).max()))
