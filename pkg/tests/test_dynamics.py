import numpy as np
import pytest

import teichkit.fixtures as fx
from oracles import FROZEN, koenigs_series, koenigs_series_eval, sternberg_bound_formula
from teichkit.circle import CircleMap
from teichkit.dynamics import (Germ1D, choose_delta, conjugate_circle, graded_grid,
                               koenigs_oracle, promotion_experiment, sternberg_bound,
                               sternberg_linearize)
from teichkit.extensions import classify_regularity
from teichkit.grid import ArgumentError, holder_ladder
from teichkit.mobius import MobiusMap, classify, translation_length


@pytest.fixture(scope="module")
def quad():
    g = fx.germ("quadratic")
    return g, sternberg_linearize(g)


def test_bound_values():
    assert sternberg_bound(0.5, 0.5, 1.0, 0.01) == pytest.approx(FROZEN["bound_delta_0.01"], rel=1e-14)
    assert sternberg_bound(0.5, 0.5, 1.0, 0.0004) == pytest.approx(FROZEN["bound_delta_0.0004"], rel=1e-14)
    assert sternberg_bound_formula(0.5, 0.5, 1.0, 0.01) == pytest.approx(FROZEN["bound_delta_0.01"], rel=1e-14)
    assert FROZEN["bound_delta_0.01"] > 1 > FROZEN["bound_delta_0.0004"]


def test_choose_delta_linear():
    delta, bound, c = choose_delta(Germ1D.linear(0.5))
    assert delta == 0.5 and c == 0.0 and bound == pytest.approx(0.5**0.5)


def test_choose_delta_rejects_expanding():
    with pytest.raises(ArgumentError):
        choose_delta(fx.germ("expanding"))


def test_germ_validation():
    x = graded_grid(0.5, 50)
    with pytest.raises(ArgumentError):
        Germ1D(x, 0.5 * x + 0.01)
    with pytest.raises(ArgumentError):
        Germ1D(x, -0.5 * x)
    with pytest.raises(ArgumentError):
        Germ1D(x[:-1], 0.5 * x[:-1])


def test_linear_germ_is_its_own_linearization():
    lin = sternberg_linearize(Germ1D.linear(0.5))
    assert lin.residual == 0 and np.max(np.abs(lin.h - lin.x)) == 0


def test_quadratic_taylor_and_series(quad):
    g, lin = quad
    b = koenigs_series(0.5, 0.1)
    assert b[2] == pytest.approx(FROZEN["koenigs_b2"], rel=1e-14)
    assert b[3] == pytest.approx(FROZEN["koenigs_b3"], rel=1e-14)
    assert abs(lin.taylor2 - 0.4) < 1e-3
    assert lin.residual <= 1e-8 and lin.contraction_factor <= lin.bound + 0.05
    x = np.linspace(-lin.delta / 2, lin.delta / 2, 201)
    assert np.max(np.abs(lin(x) - koenigs_series_eval(x, 0.5, 0.1))) < 1e-8


def test_koenigs_oracle(quad):
    x, h, flagged = koenigs_oracle(Germ1D.linear(0.5), 40)
    assert np.max(np.abs(h - x)) == 0 and not flagged
    g, lin = quad
    x, h, flagged = koenigs_oracle(g.restrict(lin.delta), 40)
    assert not flagged and np.max(np.abs(lin(x) - h)) < 1e-6


def test_uniqueness_on_overlap(quad):
    g, lin = quad
    d2 = float(g.x[g.x <= lin.delta / 2][-1])
    lin2 = sternberg_linearize(g, delta=d2)
    shared = np.isin(lin.x, lin2.x)
    assert shared.sum() > 100
    assert np.max(np.abs(lin.h[shared] - lin2.h)) < 1e-8


def test_c15_germ():
    lin = sternberg_linearize(fx.germ("c1.5"))
    assert lin.residual < 1e-8 and lin.contraction_factor <= lin.bound + 0.05
    x, dh = lin.derivative()
    _, bounded, est = holder_ladder(dh, x[1] - x[0], [0.3, 0.5, 0.8], periodic=False)
    assert bounded[0.5] and not bounded[0.8]


def test_expanding_germ_is_inverted():
    g = fx.germ("expanding")
    n = g.normalized()
    assert n.inverted and n.a == pytest.approx(0.5)
    lin = sternberg_linearize(g)
    # h(2x + 0.1x^2) = 2 h(x): b2 = c / (a - a^2)
    assert lin.inverted and lin.taylor2 == pytest.approx(koenigs_series(2.0, 0.1, 4)[2], abs=1e-6)


def test_germ_csv_roundtrip(tmp_path):
    g = fx.germ("quadratic").restrict(0.2)
    g.to_csv(tmp_path / "g.csv")
    h = Germ1D.from_csv(tmp_path / "g.csv", a=0.5)
    assert np.array_equal(g.x, h.x) and np.array_equal(g.g, h.g)


def test_conjugate_identity_and_mobius():
    gamma = MobiusMap.translation(0.5)
    G = conjugate_circle(CircleMap.identity(), gamma)
    assert np.max(np.abs(G.lift_samples - gamma.boundary_angle(G.theta))) < 1e-12
    M = MobiusMap.random(np.random.default_rng(4))
    G = conjugate_circle(CircleMap.from_mobius(M), gamma)
    C = M @ gamma @ M.inverse()
    assert np.max(np.abs(np.exp(1j * G.lift_samples) - C(np.exp(1j * G.theta)))) < 1e-12
    assert classify(C) == classify(gamma)
    assert translation_length(C) == pytest.approx(translation_length(gamma), rel=1e-10)


def test_conjugate_analytic_map(coarse):
    G = conjugate_circle(fx.circle_map("affine_boundary"), MobiusMap.translation(0.5), n=1024)
    rep = classify_regularity(G, coarse)
    assert all(rep["holder_bounded"].values())


def test_promotion_mobius_and_smooth():
    gamma = MobiusMap.translation(0.5)
    rep = promotion_experiment(fx.circle_map("mobius"), gamma)
    assert rep["verdict"] == "consistent" and "scope" in rep
    rep = promotion_experiment(fx.circle_map("sine"), gamma)
    assert rep["verdict"] == "consistent" and rep["local_residual"] < 1e-8


def test_promotion_negative_control():
    rep = promotion_experiment(fx.circle_map("cusp0.3"), MobiusMap.translation(0.5))
    assert rep["verdict"] == "hypothesis_failed"
    with pytest.raises(ArgumentError):
        promotion_experiment(fx.circle_map("sine"), MobiusMap.rotation(1.0))
