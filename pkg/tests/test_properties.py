import math

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from oracles import gibbs_expm
from spinbath import mapping, models, rcbench, spectral, thermo
from spinbath.models import BathScheme, ChainSpec
from spinbath.spectral import RCParams, SuperOhmic
from spinbath.spinops import eigendecompose, spectral_norm

SETTINGS = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
coef = st.floats(-2.0, 2.0, allow_nan=False)
seeds = st.integers(0, 2**32 - 1)


def random_hermitian(seed, dim):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


def random_density(seed, dim):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    r = a @ a.conj().T
    return r / np.trace(r)


@st.composite
def chains(draw, min_n=2, max_n=6, even=False):
    n = draw(st.integers(min_n, max_n))
    if even and n % 2:
        n += 1 if n < max_n else -1
    deltas = tuple(draw(st.lists(st.floats(0.0, 1.0), min_size=n, max_size=n)))
    return ChainSpec(n, deltas, draw(coef), draw(coef), draw(coef))


@SETTINGS
@given(seeds, st.integers(1, 5), st.floats(1e-3, 50.0))
def test_gibbs_trace_and_positivity(seed, n, beta):
    st_ = thermo.gibbs_state(random_hermitian(seed, 2**n), beta)
    assert abs(st_.populations.sum() - 1) <= 1e-12
    assert np.all(st_.populations >= 0)
    assert abs(np.trace(st_.rho) - 1) <= 1e-10
    assert np.linalg.eigvalsh(st_.rho)[0] >= -1e-10


@SETTINGS
@given(seeds, st.integers(1, 4), st.floats(0.01, 20.0), st.sampled_from([-1e3, -1.0, 0.5, 1e3]))
def test_identity_shift_invariance(seed, n, beta, c):
    h = random_hermitian(seed, 2**n)
    a, b = thermo.gibbs_state(h, beta), thermo.gibbs_state(h + c * np.eye(2**n), beta)
    for axis in "xyz":
        assert abs(thermo.structure_factor(a, axis) - thermo.structure_factor(b, axis)) <= 1e-10


@SETTINGS
@given(seeds, st.integers(1, 3), st.floats(0.05, 10.0))
def test_expm_oracle(seed, n, beta):
    h = random_hermitian(seed, 2**n)
    assert np.max(np.abs(thermo.gibbs_state(h, beta).rho - gibbs_expm(h, beta))) <= 1e-8


@SETTINGS
@given(seeds, st.integers(1, 6))
def test_eigendecompose_roundtrip(seed, n):
    h = random_hermitian(seed, 2**n)
    e, v = eigendecompose(h)
    assert np.all(np.diff(e) >= 0)
    assert spectral_norm(v @ np.diag(e) @ v.conj().T - h) <= 1e-10 * max(spectral_norm(h), 1.0)


@SETTINGS
@given(seeds, st.integers(1, 4), st.floats(0.05, 10.0))
def test_structure_factor_and_correlation_bounds(seed, n, beta):
    s = thermo.gibbs_state(random_hermitian(seed, 2**n), beta)
    for axis in "xyz":
        val = thermo.structure_factor(s, axis)
        assert (2 - n) / n - 1e-12 <= val <= 1 + 1e-12
        cm = thermo.correlation_matrix(s, axis).values
        assert np.allclose(np.diag(cm), 1, atol=1e-10)
        assert np.all(np.abs(cm) <= 1 + 1e-10)
        assert np.allclose(cm, cm.T)


@SETTINGS
@given(seeds, st.integers(1, 3), st.integers(1, 6))
def test_partial_trace_contracts(seed, n, k):
    d = 2**n
    rho = random_density(seed, d * k)
    red = rcbench.partial_trace(rho, d)
    assert abs(np.trace(red) - 1) <= 1e-10
    assert np.max(np.abs(red - red.conj().T)) <= 1e-10
    rho_s, rho_b = random_density(seed + 1, d), random_density(seed + 2, k)
    assert np.max(np.abs(rcbench.partial_trace(np.kron(rho_s, rho_b), d) - rho_s)) <= 1e-12


@SETTINGS
@given(chains(even=True), st.sampled_from(["global", "local", "half", "pairwise"]), st.floats(1.0, 10.0))
def test_zero_coupling_identity_effh(chain, kind, omega):
    rcs = [RCParams(0.0, omega)] * models.n_baths(kind, chain.n_sites)
    atts = mapping.attachments_for(BathScheme(kind, (None,) * len(rcs)), chain.n_sites, rcs)
    h_s = models.heisenberg_chain(chain)
    eff = mapping.effh_scheme(BathScheme.uniform(kind, chain.n_sites, spectral.Brownian(0.0, omega, 0.01)), chain)
    assert np.max(np.abs(eff.h - h_s)) <= 1e-12
    assert np.max(np.abs(mapping.effh_generic(h_s, atts).h - h_s)) <= 1e-12


@SETTINGS
@given(chains(even=True), st.sampled_from(["global", "local", "half", "pairwise"]), st.floats(0.01, 100.0))
def test_zero_coupling_identity_polaron(chain, kind, beta):
    scheme = BathScheme.uniform(kind, chain.n_sites, SuperOhmic(0.0, 0.5))
    h_s = models.heisenberg_chain(chain)
    assert np.max(np.abs(mapping.polaron_hamiltonian(scheme, chain, beta).h - h_s)) <= 1e-12
    assert np.max(np.abs(mapping.polaron_generic(h_s, scheme, beta) - h_s)) <= 1e-12


@SETTINGS
@given(st.integers(2, 6), st.floats(0.0, 1.0), st.floats(0.0, 5.0), st.floats(1.0, 10.0), st.floats(0.01, 100.0))
def test_zero_coupling_identity_fully_connected(n, delta, j, omega, beta):
    spec = models.FullyConnectedSpec(n, delta, j)
    h = models.fully_connected_ising(spec)
    assert np.max(np.abs(mapping.effh_fully_connected(spec, RCParams(0.0, omega)).h - h)) <= 1e-12
    assert np.max(np.abs(mapping.polaron_fully_connected(spec, SuperOhmic(0.0, 0.5), beta).h - h)) <= 1e-12


@SETTINGS
@given(chains(even=True), st.sampled_from(["global", "local", "half", "pairwise"]), seeds)
def test_closed_form_equals_generic(chain, kind, seed):
    rng = np.random.default_rng(seed)
    nb = models.n_baths(kind, chain.n_sites)
    scheme = BathScheme(kind, tuple(spectral.Brownian(rng.uniform(0, 4), rng.uniform(2, 8), 0.01) for _ in range(nb)))
    eff = mapping.effh_scheme(scheme, chain)
    rcs = [spectral.rc_params(sd) for sd in scheme.baths]
    gen = mapping.effh_generic(models.heisenberg_chain(chain), mapping.attachments_for(scheme, chain.n_sites, rcs))
    assert np.max(np.abs(eff.h - gen.h)) <= 1e-10 * max(1.0, spectral_norm(gen.h))


@SETTINGS
@given(chains(even=True), st.sampled_from(["global", "local", "half", "pairwise"]), st.floats(0.0, 0.8))
def test_jx_of_bare_bonds_unchanged(chain, kind, alpha):
    # x-x bonds commute with every coupling operator, so only same-bath shifts can touch them
    scheme = BathScheme.uniform(kind, chain.n_sites, SuperOhmic(alpha, 0.5))
    owner = models.site_to_bath(kind, chain.n_sites)
    eff = mapping.effh_scheme(scheme, chain)
    pol = mapping.polaron_hamiltonian(scheme, chain, 2.0)
    for i in range(1, chain.n_sites):
        if owner[i - 1] != owner[i]:
            assert eff.coefficient((i, "x"), (i + 1, "x")) == chain.j_x
            assert pol.coefficient((i, "x"), (i + 1, "x")) == chain.j_x


@SETTINGS
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.2, 2.0), st.floats(0.05, 50.0), st.floats(0.05, 50.0))
def test_dressing_monotone(a1, a2, wc, b1, b2):
    lo_a, hi_a = sorted((a1, a2))
    hot, cold = sorted((b1, b2))  # smaller beta is hotter
    f = spectral.dressing_exponent
    assert f(SuperOhmic(lo_a, wc), cold) <= f(SuperOhmic(hi_a, wc), cold) * (1 + 1e-12) + 1e-15
    assert f(SuperOhmic(hi_a, wc), cold) <= f(SuperOhmic(hi_a, wc), hot) * (1 + 1e-12) + 1e-15


@SETTINGS
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.2, 2.0), st.floats(0.05, 50.0))
def test_joint_dressing_identities(a1, a2, wc, beta):
    sa, sb = SuperOhmic(a1, wc), SuperOhmic(a2, wc)
    cc, ss = spectral.joint_dressing(sa, sb, beta, True)
    ra, rb = math.sqrt(a1), math.sqrt(a2)
    e_minus = math.exp(-spectral.dressing_exponent(SuperOhmic((ra - rb) ** 2, wc), beta))
    e_plus = math.exp(-spectral.dressing_exponent(SuperOhmic((ra + rb) ** 2, wc), beta))
    # cc - ss is a difference of O(1) numbers, so it carries absolute rounding error
    assert math.isclose(cc + ss, e_minus, rel_tol=1e-12, abs_tol=1e-15)
    assert math.isclose(cc - ss, e_plus, rel_tol=1e-12, abs_tol=1e-15)
    assert 0 < e_plus <= 1 and 0 < e_minus <= 1
    assert 0 <= cc - ss <= 1 and 0 < cc + ss <= 1
