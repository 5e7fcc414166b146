import numpy as np
import pytest

import teichkit.fixtures as fx
from oracles import barycenter
from teichkit.bers import QuadraticForm, b_norm, bers_projection
from teichkit.circle import CircleMap
from teichkit.extensions import (OutOfRangeError, ahlfors_weill, aw_pointwise_ratio,
                                 barycentric_extension, barycentric_point, classify_regularity)
from teichkit.grid import GridSpec
from teichkit.mobius import MobiusMap


def test_identity_extension(coarse):
    ext = barycentric_extension(CircleMap.identity(), coarse)
    assert np.max(np.abs(ext.values - coarse.inner_points())) < 1e-12
    assert ext.field.sup_bound < 1e-10


def test_mobius_reproduction(coarse):
    M = MobiusMap.random(np.random.default_rng(7))
    ext = barycentric_extension(CircleMap.from_mobius(M), coarse)
    assert np.max(np.abs(ext.values - M(coarse.inner_points()))) < 1e-10
    assert ext.field.sup_bound < 1e-8


def test_barycenter_against_root_finder():
    g = fx.circle_map("sine")
    z = np.array([0.0, 0.3 + 0.2j, -0.6j, 0.85 * np.exp(2j)])
    w = barycentric_point(g, z)
    ref = np.array([barycenter(g.lift, zi) for zi in z])
    assert np.max(np.abs(w - ref)) < 1e-10


def test_conformal_naturality():
    rng = np.random.default_rng(3)
    g = fx.circle_map("sine")
    z = 0.9 * np.sqrt(rng.uniform(size=50)) * np.exp(2j * np.pi * rng.uniform(size=50))
    for _ in range(3):
        p1, p2 = MobiusMap.random(rng), MobiusMap.random(rng)
        h = CircleMap.compose_mobius(p1, g.precompose_mobius(p2))
        assert np.max(np.abs(barycentric_point(h, z) - p1(barycentric_point(g, p2(z))))) < 1e-4


def test_extension_is_quasiconformal(coarse):
    ext = barycentric_extension(fx.circle_map("sine"), coarse)
    assert 0 < ext.field.sup_bound < 1
    assert np.isfinite(ext.jacobian_constant())


def test_aw_zero_and_monomial(spec):
    assert ahlfors_weill(QuadraticForm.zero(spec)).sup_bound == 0
    c = 0.1
    phi = QuadraticForm.monomials([c], spec, "c/z^4")
    mu = ahlfors_weill(phi)
    z = spec.inner_points()
    assert np.max(np.abs(mu.values + 0.5 * c * (1 - np.abs(z) ** 2) ** 2)) < 1e-15
    assert b_norm(bers_projection(mu) - phi) < 5e-3


def test_aw_pointwise_ratio_is_saturated(spec):
    """|mu| / (rho^-2 |phi|) at the reflected point is exactly 2 with rho = 2/(|z|^2 - 1)."""
    phi = fx.random_form(np.random.default_rng(9), spec, 0.3)
    assert aw_pointwise_ratio(ahlfors_weill(phi), phi) == pytest.approx(2.0, abs=1e-9)


def test_aw_rejects_large_forms(spec):
    with pytest.raises(OutOfRangeError):
        ahlfors_weill(fx.random_form(np.random.default_rng(9), spec, 0.6))


def test_regularity_identity(coarse):
    r = classify_regularity(CircleMap.identity(), coarse)
    assert r["field_sup"] < 1e-10 and r["b_norm"] < 1e-10
    assert r["field_vanishes"] and r["form_vanishes"]
    assert set(r["holder_ladder"].values()) == {0.0} and all(r["holder_bounded"].values())


def test_regularity_analytic_boundary_map(spec):
    r = classify_regularity(fx.circle_map("affine_boundary"), spec, de_spec=GridSpec.coarse())
    assert all(r["holder_bounded"].values())
    assert abs(r["alpha_hat"] - 2) < 0.1
    assert r["symmetric_evidence"] == "symmetric" and r["consistent"]


def test_regularity_cusp():
    """g' with a |theta|^0.5 cusp; the decay exponent needs the finer angular grid."""
    r = classify_regularity(fx.circle_map("cusp0.5"), GridSpec(n_theta=512), de_spec=GridSpec.coarse())
    b = r["holder_bounded"]
    assert all(b[a] for a in ("0.1", "0.3", "0.5")) and not any(b[a] for a in ("0.6", "0.8"))
    assert abs(r["alpha_hat"] - 0.5) < 0.15
