import numpy as np
import pytest
from hypothesis import given, strategies as st

from coherand import states
from coherand.errors import (
    BadSplit, DimCap, DimMismatch, LabelMismatch, NotAState, NotHermitian, NotTracePreserving, NotUnitary,
)
from coherand.states import CQState, DensityMatrix, KrausChannel, PureJointState


def test_density_matrix_validation():
    with pytest.raises(NotHermitian):
        DensityMatrix(np.array([[0.5, 0.2], [0.0, 0.5]]))
    with pytest.raises(NotAState):
        DensityMatrix(np.diag([1.2, -0.2]))
    with pytest.raises(NotAState):
        DensityMatrix(np.diag([0.5, 0.6]))
    with pytest.raises(DimMismatch):
        DensityMatrix(np.eye(4) / 4, (2, 3))


def test_small_negative_eigenvalues_are_clipped():
    rho = DensityMatrix(np.diag([1.0 + 5e-11, -5e-11]))
    assert rho.eigenvalues().min() >= 0
    assert np.isclose(np.trace(rho.matrix).real, 1.0, atol=1e-12)


def test_matrix_is_read_only():
    rho = DensityMatrix.plus()
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 1.0


def test_named_constructors():
    assert np.allclose(DensityMatrix.plus().matrix, 0.5 * np.ones((2, 2)))
    assert np.allclose(DensityMatrix.maximally_mixed(3).matrix, np.eye(3) / 3)
    r = DensityMatrix.from_bloch(0.6, 0, 0).matrix
    assert np.allclose(r, [[0.5, 0.3], [0.3, 0.5]])
    r = DensityMatrix.from_bloch(0, 0.4, 0).matrix
    assert np.isclose(r[0, 1], -0.2j)
    v = DensityMatrix.from_vector([1, 1j])
    assert np.allclose(v.matrix, [[0.5, -0.5j], [0.5j, 0.5]])


def test_reduced_and_tensor(rng):
    a, b = states.random_state(2, rng), states.random_state(3, rng)
    ab = a.tensor(b)
    assert ab.dims == (2, 3)
    assert np.allclose(ab.reduced(0).matrix, a.matrix)
    assert np.allclose(ab.reduced([1]).matrix, b.matrix)
    assert np.allclose(a.diagonal().matrix, np.diag(np.diag(a.matrix)))


def test_pure_joint_state(rng):
    v = states.random_pure_vector(6, rng)
    psi = PureJointState(v, (2, 3))
    assert np.allclose(psi.reduced(0).matrix, psi.density().reduced(0).matrix)
    assert np.allclose(psi.reduced(1).matrix, psi.density().reduced(1).matrix)
    with pytest.raises(BadSplit):
        PureJointState(v, (2, 2))
    with pytest.raises(NotAState):
        PureJointState(2 * v, (2, 3))


@pytest.mark.parametrize("d,rank", [(2, 2), (3, 2), (4, 1), (3, 3)])
def test_purify_reproduces_state(rng, d, rank):
    rho = states.random_state(d, rng, rank=rank)
    psi = states.purify(rho)
    assert psi.dims == (d, rank)
    assert np.allclose(psi.reduced(0).matrix, rho.matrix, atol=1e-12)


def test_measure_computational_matches_diagonal(rng):
    rho = states.random_state(3, rng)
    cq = states.measure_computational(states.purify(rho))
    assert cq.label_dim == 3
    assert np.allclose(cq.distribution(), np.diag(rho.matrix).real)
    # measured register is classical, E holds the conjugate reduced state
    assert np.allclose(cq.env_state(), states.purify(rho).reduced(1).matrix)


def test_cq_validation():
    good = np.array([np.eye(2) / 2, np.eye(2) / 2])
    CQState((0, 1), [0.5, 0.5], good, 2)
    with pytest.raises(LabelMismatch):
        CQState((0, 0), [0.5, 0.5], good, 2)
    with pytest.raises(LabelMismatch):
        CQState((0, 2), [0.5, 0.5], good, 2)
    with pytest.raises(NotAState):
        CQState((0, 1), [0.5, 0.6], good, 2)
    with pytest.raises(NotAState):
        CQState((0, 1), [0.5, 0.5], 2 * good, 2)
    with pytest.raises(DimMismatch):
        CQState((0, 1), [0.5, 0.5], good[:1], 2)


def test_cq_from_atoms_drops_null_atoms():
    cond = np.array([np.eye(1), np.eye(1), np.eye(1)])
    cq = CQState.from_atoms([0, 1, 2], [0.5, 0.5, 1e-16], cond, 4)
    assert cq.labels == (0, 1)
    assert len(cq) == 2
    assert np.allclose(cq.joint().matrix, np.diag([0.5, 0.5, 0, 0]))


def test_cq_tensor_power_labels_and_caps():
    cond = np.array([[[1.0, 0], [0, 0]], [[0, 0], [0, 1.0]]])
    cq = CQState((0, 2), [0.25, 0.75], cond, 3)
    sq = states.cq_tensor_power(cq, 2)
    assert sq.label_dim == 9
    assert sq.labels == (0, 2, 6, 8)
    assert np.allclose(sq.probs, [1 / 16, 3 / 16, 3 / 16, 9 / 16])
    sb = states.cq_tensor_power(cq, 2, bits_per_label=2)
    assert sb.label_dim == 16 and sb.labels == (0, 2, 8, 10)
    assert sb.env_dim == 4
    with pytest.raises(LabelMismatch):
        states.cq_tensor_power(cq, 2, bits_per_label=1)
    with pytest.raises(DimCap):
        states.cq_tensor_power(cq, 11)
    with pytest.raises(ValueError):
        states.cq_tensor_power(cq, 0)


def test_generalized_cnot_is_permutation():
    u = states.generalized_cnot(3)
    assert np.allclose(u.conj().T @ u, np.eye(9))
    assert states.is_incoherent_unitary(u)
    u4 = states.generalized_cnot(2, 3)
    assert np.allclose(u4.conj().T @ u4, np.eye(6))
    with pytest.raises(DimMismatch):
        states.generalized_cnot(3, 2)


def test_cnot_embed_copies_basis(rng):
    rho = states.random_state(3, rng)
    psi = states.cnot_embed(states.purify(rho))
    assert psi.dims == (3, 3, 3)
    ab = psi.reduced([0, 1]).matrix
    # A and B perfectly correlated in the computational basis
    for x in range(3):
        for y in range(3):
            if x != y:
                assert abs(ab[x * 3 + y, x * 3 + y]) < 1e-14
    assert np.allclose(psi.reduced(0).matrix, np.diag(np.diag(rho.matrix)), atol=1e-12)
    with pytest.raises(DimCap):
        states.cnot_embed(states.purify(rho), cap=10)


def test_apply_unitary_identity_matches_embed(rng):
    psi = states.purify(states.random_state(2, rng))
    a = states.apply_unitary_ab(psi, states.generalized_cnot(2))
    b = states.cnot_embed(psi)
    assert np.allclose(a.amplitudes, b.amplitudes)


def test_incoherence_predicates(rng):
    assert states.is_incoherent_state(np.diag([0.3, 0.7]))
    assert not states.is_incoherent_state(DensityMatrix.plus())
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    assert not states.is_incoherent_unitary(h)
    assert states.is_incoherent_unitary(states.random_incoherent_unitary(4, rng))
    with pytest.raises(NotUnitary):
        states.is_incoherent_unitary(np.diag([1.0, 2.0]))
    assert states.is_incoherence_preserving(KrausChannel.dephasing(3))
    assert states.is_incoherence_preserving(KrausChannel.from_unitary(states.random_incoherent_unitary(3, rng)))
    assert not states.is_incoherence_preserving(KrausChannel.from_unitary(h))


def test_kraus_channel_validation():
    with pytest.raises(NotTracePreserving):
        KrausChannel((np.diag([1.0, 0.5]),))
    with pytest.raises(DimMismatch):
        KrausChannel(())
    ch = KrausChannel.dephasing(2)
    assert np.allclose(ch.apply(DensityMatrix.plus()), np.eye(2) / 2)


@given(st.integers(min_value=0, max_value=2**31))
def test_random_bloch_inside_ball(seed):
    rho = states.random_bloch_state(np.random.default_rng(seed), r_max=0.9)
    m = rho.matrix
    r = np.sqrt((2 * m[0, 1].real) ** 2 + (2 * m[0, 1].imag) ** 2 + (m[0, 0] - m[1, 1]).real ** 2)
    assert r <= 0.9 + 1e-12
