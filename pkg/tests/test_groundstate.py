import math

import numpy as np
import pytest
from conftest import random_device, rel
from oracles import trapezoid_2d

from fluxcantilever.groundstate import (GaussianGroundState, NotPositiveDefiniteError, default_window,
                                        entanglement_entropy, ground_state_phidelta, ground_state_xy,
                                        separability_check, svd_entropy, to_xy, wavefunction_grid)
from fluxcantilever.harmonic import HarmonicModes, analytic_well, mode_frequencies
from fluxcantilever.model import derive
from fluxcantilever.potential import Branch

HBAR = 6.62607015e-34 / (2 * math.pi)


@pytest.fixture
def dev_modes(dev, dev_dq):
    return mode_frequencies(analytic_well(dev), dev, dev_dq)


def random_modes(rng, n):
    out = []
    while len(out) < n:
        p = random_device(rng)
        dq = derive(p)
        k = int(rng.integers(-dq.m_max, dq.m_max + 1))
        out.append(mode_frequencies(analytic_well(p, k, dq=dq), p, dq))
    return out


def toy_modes(omega_X, omega_Y, beta, C=1.0, I_m=1.0, hbar=1.0):
    """Modes with chosen normal frequencies and angle (bare values are implied, not used)."""
    return HarmonicModes(omega_phi=omega_X, omega_delta=omega_Y, kappa=float(np.sign(beta)), mu=math.sqrt(C * I_m),
                         beta=beta, omega_X=omega_X, omega_Y=omega_Y, branch_sign=1, C=C, I_m=I_m, hbar=hbar)


def natural_grid(state, n=512, n_sigma=8.0):
    """Psi sampled on an n x n grid spanning +-n_sigma marginal widths."""
    (p_lo, p_hi), (d_lo, d_hi) = default_window(state, n_sigma)
    g = wavefunction_grid(state, ((p_lo, p_hi), (d_lo, d_hi)), n)
    return g, g.phi_axis[1] - g.phi_axis[0], g.delta_axis[1] - g.delta_axis[0]


def random_correlated_state(rng):
    sp, sd = 10 ** rng.uniform(-20, -14), 10 ** rng.uniform(-8, -3)
    r = rng.uniform(-0.9, 0.9)
    return GaussianGroundState.from_coefficients(1 / sp**2, 1 / sd**2, 2 * r / (sp * sd))


def test_xy_state_normalized_and_second_moment():
    m = toy_modes(3.0, 1.2, 0.3, C=2.0, I_m=0.5)
    psi = ground_state_xy(m)
    x = np.linspace(-8, 8, 1601)
    P = psi(x[:, None], x[None, :]) ** 2
    dx = x[1] - x[0]
    assert trapezoid_2d(P, dx, dx) == pytest.approx(1.0, abs=1e-8)
    second = trapezoid_2d(P * x[:, None] ** 2, dx, dx)
    assert second == pytest.approx(m.hbar / (2 * m.mu * m.omega_X), rel=1e-8)


def test_equal_frequencies_rotationally_symmetric():
    psi = ground_state_xy(toy_modes(2.0, 2.0, 0.0))
    rng = np.random.default_rng(0)
    X, Y = rng.normal(size=(2, 50))
    np.testing.assert_allclose(psi(X, Y), psi(Y, X), rtol=1e-15)


def test_xy_and_phidelta_agree_pointwise(dev_modes):
    rng = np.random.default_rng(1)
    for m in [dev_modes] + random_modes(rng, 10):
        state = ground_state_phidelta(m)
        psi_xy = ground_state_xy(m)
        sp, sd = state.natural_scales()
        phi = rng.normal(size=100) * 2 * sp
        delta = rng.normal(size=100) * 2 * sd
        np.testing.assert_allclose(state(phi, delta), psi_xy(*to_xy(phi, delta, m)), rtol=1e-10)


def test_cross_coefficient_from_fitted_exponent(dev_modes):
    state = ground_state_phidelta(dev_modes)
    psi_xy = ground_state_xy(dev_modes)
    sp, sd = state.natural_scales()
    rng = np.random.default_rng(2)
    u, v = rng.normal(size=(2, 200))
    logpsi = np.log(psi_xy(*to_xy(u * sp, v * sd, dev_modes)))
    A = np.column_stack([np.ones_like(u), -u**2, -v**2, -u * v])
    coef, *_ = np.linalg.lstsq(A, logpsi, rcond=None)
    assert coef[1] / sp**2 == rel(state.a_phiphi, 1e-8)
    assert coef[2] / sd**2 == rel(state.a_deltadelta, 1e-8)
    assert coef[3] / (sp * sd) == rel(state.a_phidelta, 1e-6)
    assert state.a_phidelta != 0


def test_normalization_by_quadrature(dev_modes):
    rng = np.random.default_rng(3)
    for m in [dev_modes] + random_modes(rng, 5):
        state = ground_state_phidelta(m)
        g, dp, dd = natural_grid(state, n=801, n_sigma=9.0)
        assert trapezoid_2d(g.prob, dp, dd) == pytest.approx(1.0, abs=1e-8)


def test_marginal_variances_match_quadrature(dev_modes):
    rng = np.random.default_rng(4)
    for state in [ground_state_phidelta(dev_modes)] + [random_correlated_state(rng) for _ in range(5)]:
        g, dp, dd = natural_grid(state, n=801, n_sigma=9.0)
        var_p = trapezoid_2d(g.prob * g.phi_axis[:, None] ** 2, dp, dd)
        var_d = trapezoid_2d(g.prob * g.delta_axis[None, :] ** 2, dp, dd)
        cov = state.covariance()
        assert var_p == rel(cov[0, 0], 1e-6)
        assert var_d == rel(cov[1, 1], 1e-6)


def test_separable_without_coupling(dev):
    p = dev.replace(B_x=0.0)
    state = ground_state_phidelta(mode_frequencies(analytic_well(p), p))
    assert state.a_phidelta == 0
    assert separability_check(state)
    rep = entanglement_entropy(state)
    assert rep.separable and rep.entropy == 0 and rep.schmidt_parameter == 0


def test_reference_state_entangled(dev_modes):
    state = ground_state_phidelta(dev_modes)
    assert not separability_check(state)
    rep = entanglement_entropy(state)
    assert not rep.separable
    assert rep.entropy > 0
    # analytic value agrees with the sampled-SVD oracle
    g, _, _ = natural_grid(state)
    assert rep.entropy == pytest.approx(svd_entropy(g.psi), abs=1e-4)


def test_tiny_cross_term_counts_as_separable():
    s = GaussianGroundState.from_coefficients(1.0, 1.0, 2e-20)
    assert separability_check(s)
    assert entanglement_entropy(s).separable


def test_minus_branch_flips_cross_term(dev, dev_dq):
    a = ground_state_phidelta(mode_frequencies(analytic_well(dev, 0, Branch.PLUS), dev, dev_dq))
    b = ground_state_phidelta(mode_frequencies(analytic_well(dev, 0, Branch.MINUS), dev, dev_dq))
    assert b.a_phidelta == -a.a_phidelta
    assert (b.a_phiphi, b.a_deltadelta, b.norm) == (a.a_phiphi, a.a_deltadelta, a.norm)


def test_entropy_zero_iff_no_coupling():
    rng = np.random.default_rng(5)
    for m in random_modes(rng, 200):
        rep = entanglement_entropy(ground_state_phidelta(m))
        zero = math.sin(2 * m.beta) * (m.omega_X - m.omega_Y) == 0
        assert (rep.entropy == 0) == zero
        assert zero == (m.kappa == 0)


def test_entropy_matches_svd_oracle_on_random_states():
    rng = np.random.default_rng(6)
    for _ in range(20):
        state = random_correlated_state(rng)
        g, _, _ = natural_grid(state, n=512, n_sigma=8.0)
        assert entanglement_entropy(state).entropy == pytest.approx(svd_entropy(g.psi), abs=1e-4)


def test_entropy_invariant_under_rescaling():
    rng = np.random.default_rng(7)
    for _ in range(20):
        s = random_correlated_state(rng)
        k = 10 ** rng.uniform(-5, 5)
        scaled = GaussianGroundState.from_coefficients(s.a_phiphi / k**2, s.a_deltadelta * k**2, s.a_phidelta)
        assert entanglement_entropy(scaled).entropy == pytest.approx(entanglement_entropy(s).entropy, rel=1e-12)


def test_positive_definite_for_random_modes():
    rng = np.random.default_rng(8)
    for m in random_modes(rng, 1000):
        s = ground_state_phidelta(m)
        assert s.a_phiphi > 0 and s.a_deltadelta > 0
        assert 4 * s.a_phiphi * s.a_deltadelta > s.a_phidelta**2


def test_rejects_indefinite_exponent():
    with pytest.raises(NotPositiveDefiniteError):
        GaussianGroundState.from_coefficients(1.0, 1.0, 3.0)
    with pytest.raises(NotPositiveDefiniteError):
        GaussianGroundState(1.0, -1.0, 0.0, 1.0)


def test_grid_peak_and_ridge_orientation():
    s = GaussianGroundState.from_coefficients(1.0, 4.0, -3.0)
    g = wavefunction_grid(s, ((-3, 3), (-2, 2)), (61, 41))
    i, j = np.unravel_index(np.argmax(g.prob), g.prob.shape)
    assert (g.phi_axis[i], g.delta_axis[j]) == (0.0, 0.0)
    # negative cross coefficient: mass concentrated where phi and delta share a sign
    P, D = np.meshgrid(g.phi_axis, g.delta_axis, indexing="ij")
    assert (g.prob * P * D).sum() > 0
    w, v = np.linalg.eigh(s.covariance())
    major = v[:, np.argmax(w)]
    assert major[0] * major[1] > 0


def test_grid_rejects_degenerate_window(dev_modes):
    s = ground_state_phidelta(dev_modes)
    with pytest.raises(ValueError):
        wavefunction_grid(s, ((0, 0), (-1, 1)), 10)
