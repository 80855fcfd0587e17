import math

import numpy as np
import pytest

from oracles import SZ, gibbs_expm, kron_site
from spinbath import mapping, models, thermo
from spinbath.models import ChainSpec
from spinbath.spectral import RCParams
from spinbath.spinops import DomainError, pauli_string


def test_two_level_sz():
    st = thermo.gibbs_state(0.1 * SZ.real, 10.0)
    assert thermo.expectation(st, SZ.real) == pytest.approx(-math.tanh(1.0))


def test_high_temperature_is_maximally_mixed():
    h = models.heisenberg_chain(ChainSpec.uniform(3, 0.4, 1.0, 0.5, 0.2))
    st = thermo.gibbs_state(h, 1e-9)
    assert np.allclose(st.rho, np.eye(8) / 8, atol=1e-8)
    assert np.allclose(thermo.magnetization(st, "z"), 0, atol=1e-8)


def test_populations_and_partition():
    h = models.heisenberg_chain(ChainSpec.uniform(3, 0.4, 1.0, 0.5, 0.2))
    st = thermo.gibbs_state(h, 2.0)
    assert st.populations.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(st.populations >= 0)
    e = np.linalg.eigvalsh(h)
    assert st.log_partition == pytest.approx(math.log(np.exp(-2.0 * e).sum()))


def test_no_overflow_at_large_beta():
    h = 10 * models.heisenberg_chain(ChainSpec.uniform(2, 1.0, 1.0))
    st = thermo.gibbs_state(h, 1e3)
    assert np.all(np.isfinite(st.populations))
    assert np.isfinite(st.log_partition)


def test_expectation_identity_and_mixed():
    st = thermo.gibbs_state(models.heisenberg_chain(ChainSpec.uniform(2, 0.3, 1.0)), 1.0)
    assert thermo.expectation(st, np.eye(4)) == pytest.approx(1.0)
    mixed = np.eye(4) / 4
    assert thermo.expectation(mixed, kron_site(2, 1, "x").real) == 0.0


def test_singlet_correlator():
    st = thermo.gibbs_state(models.heisenberg_chain(ChainSpec.uniform(2, 0.0, 1, 1, 1)), 50.0)
    assert thermo.pauli_expectation(st, {1: "x", 2: "x"}) == pytest.approx(-1.0, abs=1e-3)


def test_expectation_checks():
    st = thermo.gibbs_state(np.diag([0.0, 1.0]), 1.0)
    with pytest.raises(DomainError):
        thermo.expectation(st, np.eye(4))
    with pytest.raises(DomainError):
        thermo.expectation(np.array([[0.5, 0.5], [0.5, 0.5]]), np.array([[0, 1j], [0, 0]]))
    with pytest.raises(DomainError):
        thermo.gibbs_state(np.eye(2), 0.0)


def test_correlation_matrix_mixed_is_identity():
    cm = thermo.correlation_matrix(np.eye(16) / 16, "x")
    assert np.array_equal(cm.values, np.eye(4))


def test_correlation_matrix_strong_global_is_ferromagnetic():
    chain = ChainSpec.uniform(4, 0.1, 1.0, 0.9, 0.8)
    st = thermo.gibbs_state(mapping.effh_global(chain, RCParams(3.0, 10.0)).h, 20.0)
    cm = thermo.correlation_matrix(st, "x").values
    assert np.all(cm > 0.99)
    assert np.allclose(cm, cm.T)


def test_structure_factor_mixed():
    for n in (1, 3, 5):
        assert thermo.structure_factor(np.eye(2**n) / 2**n, "y") == pytest.approx(1.0 / n)


def test_structure_factor_neel_state():
    # |+ - + -> in the x basis
    plus = np.array([1, 1]) / math.sqrt(2)
    minus = np.array([1, -1]) / math.sqrt(2)
    psi = np.kron(np.kron(plus, minus), np.kron(plus, minus))
    rho = np.outer(psi, psi)
    assert thermo.structure_factor(rho, "x") == pytest.approx(0.0, abs=1e-14)


def test_structure_factor_matches_dense_square():
    rng = np.random.default_rng(2)
    h = models.heisenberg_chain(ChainSpec(4, tuple(rng.uniform(0, 1, 4)), 0.7, 1.1, 0.3))
    st = thermo.gibbs_state(h, 1.3)
    for a in "xyz":
        tot = sum(kron_site(4, i, a) for i in range(1, 5))
        assert thermo.structure_factor(st, a) == pytest.approx(thermo.expectation(st, tot @ tot) / 16)


def test_strong_coupling_structure_factors():
    n = 4
    chain = ChainSpec.uniform(n, 0.1, 1.0, 0.9, 0.8)
    st = thermo.gibbs_state(mapping.effh_global(chain, RCParams(3.0, 10.0)).h, 20.0)
    assert thermo.structure_factor(st, "x") == pytest.approx(1.0, abs=1e-3)
    assert thermo.structure_factor(st, "y") == pytest.approx(1 / n, abs=0.02)
    assert thermo.structure_factor(st, "z") == pytest.approx(1 / n, abs=0.02)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("beta", [0.3, 2.0, 15.0])
def test_expm_oracle(n, beta):
    rng = np.random.default_rng(n * 100 + int(beta * 10))
    h = models.heisenberg_chain(ChainSpec(n, tuple(rng.uniform(-1, 1, n)), *rng.uniform(-1, 1, 3)))
    st = thermo.gibbs_state(h, beta)
    ref = gibbs_expm(h, beta)
    assert np.max(np.abs(st.rho - ref)) <= 1e-8
    for site in range(1, n + 1):
        for a in "xyz":
            obs = kron_site(n, site, a)
            assert thermo.expectation(st, obs) == pytest.approx(np.trace(ref @ obs).real, abs=1e-8)


@pytest.mark.parametrize("c", [-1e3, 1e3])
def test_identity_shift_invariance(c):
    h = models.heisenberg_chain(ChainSpec.uniform(4, 0.2, 1.0, 0.6, 0.4))
    a, b = thermo.gibbs_state(h, 3.0), thermo.gibbs_state(h + c * np.eye(16), 3.0)
    for axis in "xyz":
        assert abs(thermo.structure_factor(a, axis) - thermo.structure_factor(b, axis)) <= 1e-10
    assert np.max(np.abs(a.rho - b.rho)) <= 1e-10


def test_gibbs_from_spectrum_reuse():
    h = models.heisenberg_chain(ChainSpec.uniform(3, 0.2, 1.0))
    e, v = np.linalg.eigh(h)
    assert np.allclose(thermo.gibbs_from_spectrum(e, v, 2.0).rho, thermo.gibbs_state(h, 2.0).rho)


def test_pauli_expectation_matches_dense():
    rng = np.random.default_rng(9)
    a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    rho = a @ a.conj().T
    rho /= np.trace(rho)
    ops = {1: "y", 3: "z"}
    assert thermo.pauli_expectation(rho, ops) == pytest.approx(np.trace(rho @ pauli_string(3, ops)).real)
