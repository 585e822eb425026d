import numpy as np
import pytest

from hypercert import linalg
from hypercert.linalg import (
    ID2,
    PAULI_X,
    PAULI_Z,
    RegisterLayout,
    bell_projectors,
    controlled,
    dm,
    embed,
    entanglement_entropy,
    fidelity,
    partial_inner,
    partial_sandwich,
    partial_trace,
    reorder,
    tensor,
)

from helpers import rand_density, rand_state, brute_partial_trace

E0 = np.array([1, 0], dtype=complex)
E1 = np.array([0, 1], dtype=complex)
PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
AB = RegisterLayout(("A", "B"))


def test_tensor_basis_vectors():
    assert np.array_equal(tensor(E0, E1), np.array([0, 1, 0, 0], dtype=complex))


def test_tensor_identities():
    assert np.array_equal(tensor(ID2, ID2), np.eye(4))


def test_tensor_pauli_application():
    # sigma_z (x) sigma_x maps |00> to |01>: hand multiplication of the 4x4 matrix
    out = tensor(PAULI_Z, PAULI_X) @ tensor(E0, E0)
    assert np.allclose(out, tensor(E0, E1), atol=1e-15)


def test_tensor_associative():
    rng = np.random.default_rng(0)
    for _ in range(10):
        a, b, c = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(3))
        assert np.max(np.abs(tensor(tensor(a, b), c) - tensor(a, tensor(b, c)))) < 1e-14


def test_partial_trace_bell_marginal():
    red = partial_trace(dm(PHI_PLUS), AB, ["A"])
    assert np.allclose(red, ID2 / 2, atol=1e-14)


def test_partial_trace_keep_all():
    rho = rand_density(np.random.default_rng(1), 4)
    assert np.allclose(partial_trace(rho, AB, ["A", "B"]), rho, atol=1e-14)


def test_partial_trace_against_brute_force():
    rng = np.random.default_rng(2)
    layout = RegisterLayout(("q0", "q1", "q2", "q3"))
    rho = rand_density(rng, 16)
    for keep, pos in ((["q0", "q1"], [0, 1]), (["q1", "q3"], [1, 3]), (["q2"], [2])):
        assert np.allclose(partial_trace(rho, layout, keep), brute_partial_trace(rho, 4, pos), atol=1e-12)


def test_partial_trace_hyper_product():
    # tracing spatial out of a pol (x) spat product leaves the pol projector
    layout = RegisterLayout(("polA", "polB", "spatA", "spatB"))
    rho = dm(tensor(PHI_PLUS, PHI_PLUS))
    red = partial_trace(rho, layout, ["polA", "polB"])
    expected = brute_partial_trace(rho, 4, [0, 1])
    assert np.allclose(red, expected, atol=1e-12)
    assert np.allclose(red, dm(PHI_PLUS), atol=1e-12)


def test_partial_trace_factor_property():
    rng = np.random.default_rng(3)
    layout = RegisterLayout(("a", "b"))
    for _ in range(5):
        r1, r2 = rand_density(rng, 2), rand_density(rng, 2)
        assert np.allclose(partial_trace(tensor(r1, r2), layout, ["a"]), r1, atol=1e-12)


def test_partial_trace_unknown_role():
    with pytest.raises(ValueError):
        partial_trace(dm(PHI_PLUS), AB, ["C"])


def test_fidelity_examples():
    assert fidelity(dm(PHI_PLUS), PHI_PLUS) == pytest.approx(1.0, abs=1e-14)
    assert fidelity(np.eye(4) / 4, PHI_PLUS) == pytest.approx(0.25, abs=1e-14)


def test_fidelity_werner():
    p = 0.8
    rho = p * dm(PHI_PLUS) + (1 - p) * np.eye(4) / 4
    # oracle: explicit contraction, independent of the fidelity routine
    oracle = float(np.real(np.einsum("i,ij,j->", PHI_PLUS.conj(), rho, PHI_PLUS)))
    assert oracle == pytest.approx((1 + 3 * p) / 4, abs=1e-12)
    assert fidelity(rho, PHI_PLUS) == pytest.approx(oracle, abs=1e-12)
    assert fidelity(rho, PHI_PLUS) == pytest.approx(0.85, abs=1e-12)


def test_fidelity_range_property():
    rng = np.random.default_rng(4)
    for _ in range(25):
        f = fidelity(rand_density(rng, 8), rand_state(rng, 8))
        assert -1e-12 <= f <= 1 + 1e-12


def test_fidelity_dimension_mismatch():
    with pytest.raises(ValueError):
        fidelity(np.eye(4) / 4, rand_state(np.random.default_rng(5), 8))


def test_entropy_bell_and_product():
    assert entanglement_entropy(PHI_PLUS, AB, ["A"]) == pytest.approx(1.0, abs=1e-12)
    assert entanglement_entropy(tensor(E0, E0), AB, ["A"]) == pytest.approx(0.0, abs=1e-12)


def test_entropy_partially_entangled():
    psi = np.array([1, 1, 1, 0], dtype=complex) / np.sqrt(3)
    # oracle: diagonalize the 2x2 reduced matrix directly
    red = brute_partial_trace(dm(psi), 2, [0])
    lam = np.linalg.eigvalsh(red)
    expected = float(-sum(x * np.log2(x) for x in lam if x > 1e-12))
    assert expected == pytest.approx(0.5500, abs=1e-3)
    assert entanglement_entropy(psi, AB, ["A"]) == pytest.approx(expected, abs=1e-12)


def test_entropy_cut_symmetry():
    rng = np.random.default_rng(6)
    layout = RegisterLayout(("a", "b", "c"))
    for _ in range(10):
        psi = rand_state(rng, 8)
        sa = entanglement_entropy(psi, layout, ["a"])
        sbc = entanglement_entropy(psi, layout, ["b", "c"])
        assert sa == pytest.approx(sbc, abs=1e-10)


def test_entropy_requires_normalization():
    with pytest.raises(ValueError):
        entanglement_entropy(2 * PHI_PLUS, AB, ["A"])


def test_bell_projectors_complete_and_orthogonal():
    projs = bell_projectors()
    assert np.allclose(sum(projs), np.eye(4), atol=1e-14)
    for i, p in enumerate(projs):
        for j, q in enumerate(projs):
            ref = p if i == j else np.zeros((4, 4))
            assert np.max(np.abs(p @ q - ref)) < 1e-12


def test_bell_projector_application():
    projs = bell_projectors()
    assert np.allclose(projs[0] @ PHI_PLUS, PHI_PLUS, atol=1e-14)
    # P_{psi-} |01> = (|01> - |10>)/2 by writing out the projector
    psi_minus = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
    out = projs[3] @ np.array([0, 1, 0, 0], dtype=complex)
    assert np.allclose(out, psi_minus / np.sqrt(2), atol=1e-14)


def test_embed_matches_kron_for_adjacent_roles():
    rng = np.random.default_rng(7)
    layout = RegisterLayout(("a", "b", "c"))
    op = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert np.allclose(embed(op, layout, ["a", "b"]), tensor(op, ID2), atol=1e-14)
    assert np.allclose(embed(op, layout, ["b", "c"]), tensor(ID2, op), atol=1e-14)


def test_embed_role_order_swap():
    layout = RegisterLayout(("a", "b"))
    op = tensor(PAULI_Z, PAULI_X)  # Z on first slot, X on second
    swapped = embed(op, layout, ["b", "a"])
    assert np.allclose(swapped, tensor(PAULI_X, PAULI_Z), atol=1e-14)


def test_controlled_gate_is_cnot():
    layout = RegisterLayout(("c", "t"))
    cnot = controlled(PAULI_X, layout, ["t"], {"c": 1})
    expected = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    assert np.allclose(cnot, expected, atol=1e-14)
    anti = controlled(PAULI_X, layout, ["t"], {"c": 0})
    expected_anti = np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], dtype=complex)
    assert np.allclose(anti, expected_anti, atol=1e-14)


def test_reorder_roundtrip():
    rng = np.random.default_rng(8)
    a = RegisterLayout(("x", "y", "z"))
    b = RegisterLayout(("z", "x", "y"))
    psi = rand_state(rng, 8)
    assert np.allclose(reorder(reorder(psi, a, b), b, a), psi, atol=1e-14)


def test_partial_inner_and_sandwich_agree():
    rng = np.random.default_rng(9)
    layout = RegisterLayout(("a", "b", "c"))
    psi = rand_state(rng, 8)
    probe = rand_state(rng, 2)
    rest = partial_inner(psi, layout, ["b"], probe)
    red = partial_sandwich(dm(psi), layout, ["b"], probe)
    assert np.allclose(dm(rest), red, atol=1e-12)


def test_validators():
    rng = np.random.default_rng(10)
    assert linalg.is_density(rand_density(rng, 4))
    assert not linalg.is_density(np.eye(4))
    assert linalg.is_unitary(tensor(ID2, PAULI_X))
    assert linalg.is_normalized(rand_state(rng, 6))
