import numpy as np
import pytest

from oracles import FROZEN, exterior_weight, schwarzian_fd, schwarzian_z_plus_k_over_z
from teichkit.beltrami import BeltramiField
from teichkit.bers import (QuadraticForm, a_p_norm, b0_alpha_norm, b0_decay_profile, b_norm,
                           bers_projection, decay_exponent, in_b0, invariance_residual, pullback,
                           schwarzian)
from teichkit.grid import ArgumentError
from teichkit.mobius import FuchsianSample, MobiusMap
from teichkit.solver import solve_bers, solve_disk


@pytest.fixture(scope="module")
def phi01(spec):
    return bers_projection(BeltramiField.constant(0.1, spec))


def test_identity_has_zero_schwarzian(spec):
    phi = schwarzian(solve_bers(BeltramiField.zero(spec)))
    assert np.max(np.abs(phi(spec.outer_points()))) == 0
    assert b_norm(phi) == 0


def test_constant_field_value_at_2(phi01):
    assert phi01(np.array([2.0 + 0j]))[0] == pytest.approx(FROZEN["schwarzian_k0.1_z2"], rel=1e-9)
    assert phi01.weighted(np.array([2.0 + 0j]))[0] == pytest.approx(FROZEN["weighted_k0.1_z2"], rel=1e-9)
    assert schwarzian_z_plus_k_over_z(2.0, 0.1) == pytest.approx(FROZEN["schwarzian_k0.1_z2"], rel=1e-14)


def test_constant_field_far_and_near(spec, phi01):
    zo = spec.outer_points()
    exact = schwarzian_z_plus_k_over_z(zo, 0.1)
    rel = np.abs(phi01(zo) - exact) / np.abs(exact)
    assert rel[np.abs(zo) >= 1.5].max() < 1e-3
    assert rel[np.abs(zo) >= 1.05].max() < 1e-2


def test_schwarzian_against_finite_differences(spec):
    """Laurent-series Schwarzian of a generic solve against finite differences of
    the exterior map, and invariance under a Moebius post-composition."""
    mu = BeltramiField.from_callable(lambda z: 0.2 * z + 0.1 * np.conj(z) ** 2, spec)
    f = solve_bers(mu)
    F = lambda z: f._laurent_eval(np.asarray(z, dtype=complex))
    M = lambda w: (2 * w + 1) / (w + 3)
    z = np.array([1.6, 2.0j, -1.8 + 0.5j, 3.0 - 1.0j])
    phi = schwarzian(f)(z)
    assert np.max(np.abs(schwarzian_fd(F, z) - phi)) < 2e-7
    assert np.max(np.abs(schwarzian_fd(lambda s: M(F(s)), z) - phi)) < 1e-6


def test_radial_stretch_is_trivial(spec):
    for K in (1.5, 2.0):
        assert b_norm(bers_projection(BeltramiField.radial_stretch(K, spec))) < 5e-3


def test_norms_of_zero(spec):
    z = QuadraticForm.zero(spec)
    assert b_norm(z) == 0 and a_p_norm(z, 2) == 0 and b0_alpha_norm(z, 0.5) == 0
    assert in_b0(z)["member"]


def test_b_norm_and_decay(phi01):
    bn = b_norm(phi01)
    assert 0.15 - 1e-3 <= bn < 0.16
    prof = b0_decay_profile(phi01)
    vals = [v for _, v in prof]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    ah, r2, lower = decay_exponent(phi01)
    assert abs(ah - 2) < 0.1 and r2 > 0.99 and not lower
    assert in_b0(phi01)["member"]


def test_decay_exponent_synthetic_profiles(spec):
    eps = spec.boundary_offsets
    assert decay_exponent(None, [(e, e) for e in eps])[0] == pytest.approx(1.0, abs=1e-12)
    assert decay_exponent(None, [(e, 0.3) for e in eps])[0] == pytest.approx(0.0, abs=1e-12)
    assert decay_exponent(None, [(e, 0.0) for e in eps])[0] == np.inf
    with pytest.raises(ArgumentError):
        decay_exponent(None, [(0.1, 1.0), (0.05, 0.5)])


def test_b0_membership_of_non_decaying_form(spec):
    # phi_w = const: rho^-2 |phi| ~ (1 - |w|^2)^2 decays, phi_w = (1 - w)^-2 does not
    assert in_b0(QuadraticForm.monomials([0.3], spec))["member"]
    phi = QuadraticForm(spec, lambda w: 0.05 / (1 - np.asarray(w, dtype=complex) * 0.999) ** 2, "pole")
    assert not in_b0(phi)["member"]
    assert b0_alpha_norm(phi, 0.5) == np.inf


def test_pullback(spec):
    rng = np.random.default_rng(11)
    phi = QuadraticForm.monomials(rng.normal(size=5) + 1j * rng.normal(size=5), spec).scale(0.1)
    z = 1.3 * np.exp(2j * np.pi * rng.uniform(size=20))
    ident = pullback(phi, MobiusMap.identity())
    assert np.max(np.abs(ident(z) - phi(z))) < 1e-15
    g1, g2 = MobiusMap.random(rng), MobiusMap.random(rng)
    lhs = pullback(phi, g1 @ g2)(z)
    rhs = pullback(pullback(phi, g1), g2)(z)
    assert np.max(np.abs(lhs - rhs)) < 1e-8 * np.max(np.abs(lhs))
    # definition: phi(g z) g'(z)^2 on the exterior disk
    assert np.max(np.abs(pullback(phi, g1)(z) - phi(g1(z)) * g1.derivative(z) ** 2)) < 1e-12
    assert abs(b_norm(pullback(phi, g1)) - b_norm(phi)) < 1e-6


def test_invariance_residual(coarse):
    assert invariance_residual(QuadraticForm.zero(coarse), FuchsianSample((MobiusMap.translation(0.5),))) == 0
    rng = np.random.default_rng(2)
    phi = QuadraticForm.monomials(rng.normal(size=4) + 1j * rng.normal(size=4), coarse).scale(0.1)
    assert invariance_residual(phi, FuchsianSample((MobiusMap.translation(0.5),))) > 1e-3
    # field symmetrized over the cyclic group of rotations by 2 pi / 3
    om = np.exp(2j * np.pi / 3)
    nu0 = lambda z: 0.15 * z + 0.1 * z**2 + 0.05 * np.conj(z)
    # (gamma^* nu)(z) = nu(gamma z) conj(gamma') / gamma' for gamma(z) = om^k z
    sym = lambda z: sum(nu0(om**k * z) * om ** (-2 * k) for k in range(3)) / 3
    nu = BeltramiField.from_callable(sym, coarse)
    res = invariance_residual(bers_projection(nu), FuchsianSample((MobiusMap.rotation(2 * np.pi / 3),)))
    assert res < 1e-2
