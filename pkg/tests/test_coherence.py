import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from coherand import coherence as C
from coherand import states
from coherand.errors import AlphaOutOfRange, BlochOutOfBall
from coherand.states import DensityMatrix

import oracles

MIXED06 = DensityMatrix.from_bloch(0.6, 0.0, 0.0)


def test_reference_values():
    assert C.c_r(DensityMatrix.plus()) == pytest.approx(1.0)
    assert C.c_r(DensityMatrix.maximally_coherent(4)) == pytest.approx(2.0)
    assert C.c_r(DensityMatrix.maximally_mixed(3)) == pytest.approx(0.0, abs=1e-14)
    assert C.c_r(MIXED06) == pytest.approx(0.2780719051, abs=1e-9)
    assert C.c_f(MIXED06).value == pytest.approx(0.4689955936, abs=1e-9)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_c_r_closed_form(rng, d):
    for _ in range(5):
        rho = states.random_state(d, rng)
        expect = oracles.entropy(np.diag(np.diag(rho.matrix))) - oracles.entropy(rho.matrix)
        assert C.c_r(rho) == pytest.approx(expect, abs=1e-10)
        assert C.c_r(rho) == pytest.approx(
            oracles.rel_entropy_psd(rho.matrix, np.diag(np.diag(rho.matrix).real)), abs=1e-9)


def test_c_r_is_min_over_diagonal_grid(rng):
    for _ in range(5):
        rho = states.random_state(2, rng)
        assert C.c_r(rho) == pytest.approx(oracles.cr_qubit_grid(rho.matrix), abs=1e-4)


def test_bloch_vector():
    b = C.QubitBloch(0.1, -0.2, 0.3)
    rt = C.QubitBloch.of(b.state())
    assert (rt.x, rt.y, rt.z) == pytest.approx((0.1, -0.2, 0.3))
    with pytest.raises(BlochOutOfBall):
        C.QubitBloch(0.8, 0.8, 0.0)


def test_qubit_closed_forms_against_bruteforce(rng):
    for _ in range(4):
        b = C.QubitBloch.of(states.random_bloch_state(rng))
        cr, cf = C.qubit_measures(b)
        assert cf == pytest.approx(oracles.cf_qubit_bruteforce(b.x, b.y, b.z), abs=1e-4)
        assert cr == pytest.approx(C.c_r(b.state()), abs=1e-10)
        assert cf >= cr - 1e-12


def test_qubit_formation_decomposition(rng):
    rho = states.random_bloch_state(rng, r_max=0.95)
    res = C.c_f(rho)
    assert res.exact
    assert np.allclose(res.decomposition.reconstruct(), rho.matrix, atol=1e-12)
    assert res.decomposition.average_coherence() == pytest.approx(res.value, abs=1e-12)


def _random_decomposition_average(rho, rng, k):
    lam, vec = np.linalg.eigh(rho.matrix)
    r = lam.size
    z = rng.normal(size=(k, r)) + 1j * rng.normal(size=(k, r))
    q, _ = np.linalg.qr(z)
    psi = q @ (np.sqrt(np.clip(lam, 0, None))[:, None] * vec.T)
    p = np.sum(np.abs(psi) ** 2, axis=1)
    total = 0.0
    for pi, v in zip(p, psi):
        if pi > 1e-15:
            x = np.abs(v) ** 2 / pi
            total += -pi * sum(t * math.log2(t) for t in x if t > 0)
    return total


def test_qutrit_formation_is_a_valid_upper_bound(rng):
    rho = states.random_state(3, rng)
    res = C.c_f(rho, restarts=5)
    assert not res.exact
    dec = res.decomposition
    assert np.allclose(dec.reconstruct(), rho.matrix, atol=1e-10)
    assert dec.average_coherence() == pytest.approx(res.value, abs=1e-10)
    assert res.value >= C.c_r(rho) - 1e-10
    for _ in range(30):
        assert res.value <= _random_decomposition_average(rho, rng, 9) + 1e-9


def test_formation_pure_and_block_states():
    res = C.c_f(DensityMatrix.maximally_coherent(3))
    assert res.exact and res.value == pytest.approx(math.log2(3))
    blk = np.zeros((3, 3))
    blk[:2, :2] = 0.35
    blk[2, 2] = 0.3
    rho = DensityMatrix(blk)
    assert C.rates_coincide(rho)
    assert C.c_f(rho, restarts=5).value == pytest.approx(C.c_r(rho), abs=1e-6)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8, 1.5, 2.0])
def test_petz_coherence(rng, alpha):
    rho = states.random_state(2, rng)
    closed = C.c_r_alpha_petz(rho, alpha)
    assert closed == pytest.approx(C.c_r_alpha_petz(rho, alpha, method="optimize"), abs=1e-8)
    assert closed == pytest.approx(oracles.petz_coherence_1d(rho.matrix, alpha), abs=1e-8)


@pytest.mark.parametrize("alpha", [0.5, 2 / 3, 0.8, 1.5, 2.0])
def test_sandwiched_coherence(rng, alpha):
    rho = states.random_state(2, rng)
    assert C.c_r_alpha_sand(rho, alpha) == pytest.approx(oracles.sand_coherence_1d(rho.matrix, alpha), abs=1e-8)


def test_renyi_coherence_ranges():
    with pytest.raises(AlphaOutOfRange):
        C.c_r_alpha_sand(MIXED06, 0.4)
    with pytest.raises(AlphaOutOfRange):
        C.c_r_alpha_sand(MIXED06, 2.5)
    with pytest.raises(AlphaOutOfRange):
        C.c_r_alpha_petz(MIXED06, 3.0)
    with pytest.raises(ValueError):
        C.c_r_alpha_petz(MIXED06, 0.5, method="bogus")


def test_renyi_coherence_limits_and_monotonicity(rng):
    for d in (2, 3):
        rho = states.random_state(d, rng)
        cr = C.c_r(rho)
        for a in (1 - 1e-5, 1 + 1e-5):
            assert C.c_r_alpha_petz(rho, a) == pytest.approx(cr, abs=1e-4)
            assert C.c_r_alpha_sand(rho, a) == pytest.approx(cr, abs=1e-4)
        orders = (0.5, 0.7, 0.9, 1.2, 1.6, 2.0)
        for f in (C.c_r_alpha_petz, C.c_r_alpha_sand):
            vals = [f(rho, a) for a in orders]
            assert all(b >= a - 1e-8 for a, b in zip(vals, vals[1:]))


def test_pure_states_have_unit_renyi_coherence():
    for a in (0.5, 0.8, 1.5, 2.0):
        assert C.c_r_alpha_sand(DensityMatrix.plus(), a) == pytest.approx(1.0, abs=1e-8)
        assert C.c_r_alpha_petz(DensityMatrix.plus(), a) == pytest.approx(1.0, abs=1e-10)


def test_rates_coincide_cases(rng):
    assert C.rates_coincide(DensityMatrix.plus())
    assert C.rates_coincide(DensityMatrix.maximally_mixed(3))
    assert not C.rates_coincide(MIXED06)
    assert C.rates_coincide(DensityMatrix(np.diag([0.2, 0.8])))
    mixed_block = np.diag([0.3, 0.35, 0.35]).astype(complex)
    mixed_block[1, 2] = mixed_block[2, 1] = 0.1
    assert not C.rates_coincide(DensityMatrix(mixed_block))
    assert C.coherence_blocks(DensityMatrix(mixed_block)) == [[0], [1, 2]]


@given(st.integers(min_value=0, max_value=2**31))
def test_c_r_additive(seed):
    rho = states.random_state(2, np.random.default_rng(seed))
    assert C.c_r(rho.tensor(rho)) == pytest.approx(2 * C.c_r(rho), abs=1e-10)


@given(st.integers(min_value=0, max_value=2**31))
def test_incoherent_unitaries_preserve_coherence(seed):
    rng = np.random.default_rng(seed)
    rho = states.random_state(3, rng)
    u = states.random_incoherent_unitary(3, rng)
    rot = DensityMatrix(u @ rho.matrix @ u.conj().T)
    assert C.c_r(rot) == pytest.approx(C.c_r(rho), abs=1e-10)
    assert C.c_r_alpha_petz(rot, 2.0) == pytest.approx(C.c_r_alpha_petz(rho, 2.0), abs=1e-9)
