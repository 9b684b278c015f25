import numpy as np
import pytest
from hypothesis import given, strategies as st

from coherand import linalg
from coherand.errors import DimMismatch, DimensionOverflow, DomainError, NoConvergence, NotHermitian

import oracles


def random_hermitian(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return g + g.conj().T


@pytest.mark.parametrize("d", [1, 2, 3, 5, 8, 16])
def test_jacobi_matches_lapack(rng, d):
    m = random_hermitian(rng, d)
    dec = linalg.jacobi_eigh(m)
    assert np.allclose(dec.eigenvalues, np.linalg.eigvalsh(m), atol=1e-10)
    assert np.allclose(dec.reconstruct(), m, atol=1e-9)
    v = dec.eigenvectors
    assert np.allclose(v.conj().T @ v, np.eye(d), atol=1e-12)
    assert np.all(np.diff(dec.eigenvalues) >= -1e-12)


def test_jacobi_real_symmetric_and_degenerate(rng):
    q, _ = np.linalg.qr(rng.normal(size=(6, 6)))
    m = q @ np.diag([1, 1, 1, 2, 2, 5.0]) @ q.T
    dec = linalg.eig_hermitian(m, method="jacobi")
    assert np.allclose(dec.eigenvalues, [1, 1, 1, 2, 2, 5], atol=1e-10)
    assert np.allclose(dec.reconstruct(), m, atol=1e-10)


def test_jacobi_sweep_cap_raises(rng):
    with pytest.raises(NoConvergence):
        linalg.jacobi_eigh(random_hermitian(rng, 6), max_sweeps=1)


def test_diagonal_input_needs_no_rotation():
    dec = linalg.jacobi_eigh(np.diag([3.0, -1.0, 2.0]))
    assert np.allclose(dec.eigenvalues, [-1, 2, 3])


def test_check_hermitian_rejects():
    with pytest.raises(NotHermitian):
        linalg.check_hermitian([[0, 1], [0, 0]])
    with pytest.raises(DimMismatch):
        linalg.as_matrix(np.zeros((2, 3)))
    with pytest.raises(DomainError):
        linalg.as_matrix([[np.nan, 0], [0, 1]])


def test_unknown_eigensolver():
    with pytest.raises(ValueError):
        linalg.eig_hermitian(np.eye(2), method="qr")


def test_tensor_and_caps():
    a, b = np.diag([1.0, 2.0]), np.array([[0, 1], [1, 0]])
    assert np.allclose(linalg.tensor(a, b), np.kron(a, b))
    assert np.allclose(linalg.tensor_power(a, 3), np.kron(np.kron(a, a), a))
    with pytest.raises(DimensionOverflow):
        linalg.tensor(np.eye(64), np.eye(128))
    with pytest.raises(DimensionOverflow):
        linalg.tensor_power(np.eye(2), 13)


@pytest.mark.parametrize("dims,keep", [((2, 3), [0]), ((2, 3), [1]), ((2, 2, 3), [0, 2]),
                                       ((3, 2, 2), [1]), ((2, 2, 2), [])])
def test_partial_trace_matches_oracle(rng, dims, keep):
    d = int(np.prod(dims))
    m = random_hermitian(rng, d)
    got = linalg.partial_trace(m, dims, keep)
    if keep:
        assert np.allclose(got, oracles.ptrace(m, dims, keep))
    else:
        assert np.allclose(got, [[np.trace(m)]])


def test_partial_trace_bad_dims():
    with pytest.raises(DimMismatch):
        linalg.partial_trace(np.eye(6), (2, 2), [0])
    with pytest.raises(DimMismatch):
        linalg.partial_trace(np.eye(4), (2, 2), [2])


def test_spectral_apply_and_domain():
    m = np.diag([0.25, 0.0, 1.0])
    assert np.allclose(linalg.spectral_apply(m, np.sqrt), np.diag([0.5, 0, 1]))
    logm = linalg.spectral_apply(m, np.log2, zero_value=0.0)
    assert np.allclose(logm, np.diag([-2, 0, 0]))
    with pytest.raises(DomainError):
        linalg.spectral_apply(np.diag([-1.0, 1.0]), np.log)


def test_mpower_support_and_projector():
    m = np.diag([0.5, 0.0, 0.5])
    assert np.allclose(linalg.mpower(m, -1), np.diag([2, 0, 2]))
    assert np.allclose(linalg.support_projector(m), np.diag([1, 0, 1]))


def test_group_eigenvalues_counts_product_spectrum():
    lam = np.array([0.8, 0.2])
    prod = np.kron(np.kron(lam, lam), lam)
    assert len(linalg.group_eigenvalues(prod)) == 4
    assert len(linalg.group_eigenvalues(np.kron(np.ones(2) / 2, np.ones(2) / 2))) == 1
    assert linalg.group_eigenvalues(np.array([])) == []


def test_pinch_is_block_dephasing(rng):
    sigma = np.diag([0.5, 0.25, 0.25])
    rho = random_hermitian(rng, 3)
    p = linalg.pinch(rho, sigma)
    expect = np.zeros_like(rho)
    expect[0, 0] = rho[0, 0]
    expect[1:, 1:] = rho[1:, 1:]
    assert np.allclose(p, expect)
    assert np.allclose(p @ sigma, sigma @ p)
    with pytest.raises(DimMismatch):
        linalg.pinch(np.eye(2), np.eye(3))


@given(st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=2**31))
def test_trace_norm_properties(d, seed):
    rng = np.random.default_rng(seed)
    m = random_hermitian(rng, d)
    tn = linalg.trace_norm(m)
    assert tn >= abs(np.trace(m).real) - 1e-10
    assert np.isclose(tn, oracles.trace_norm(m))
    assert np.isclose(linalg.trace_norm(-2 * m), 2 * tn)
