import numpy as np
import pytest

from teichkit import config
from teichkit.beltrami import BeltramiField, maximal_dilatation
from teichkit.solver import BudgetError, ChartError, SolverError, solve_bers, solve_disk


def test_zero_is_identity(spec):
    f = solve_bers(BeltramiField.zero(spec))
    z = spec.inner_points()
    assert np.max(np.abs(f.values - z)) < 1e-13
    assert f.dbar_residual < 1e-7  # finite differences of exact samples
    zo = spec.outer_points()
    assert np.max(np.abs(f.evaluate(zo) - zo)) < 1e-13
    g = solve_disk(BeltramiField.zero(spec))
    assert np.max(np.abs(g.values - z)) < 1e-12


def test_constant_coefficient_closed_form(spec):
    k = 0.1
    f = solve_bers(BeltramiField.constant(k, spec))
    z, zo = spec.inner_points(), spec.outer_points()
    # z + k conj(z) inside, z + k/z outside: continuous across the circle
    assert np.max(np.abs(f.values - (z + k * np.conj(z)))) < 1e-4
    assert np.max(np.abs(f.evaluate(zo) - (zo + k / zo))) < 1e-4
    assert f.dbar_residual < config.get("dbar_tol")


def test_inverse_evaluate(spec):
    f = solve_bers(BeltramiField.constant(0.1, spec))
    assert abs(f.inverse_evaluate(np.array([2.05 + 0j]))[0] - 2.0) < 1e-8
    rng = np.random.default_rng(1)
    z = rng.uniform(0.1, 0.95, 50) * np.exp(2j * np.pi * rng.uniform(size=50))
    assert np.max(np.abs(f.inverse_evaluate(f.evaluate(z)) - z)) < 1e-8


def test_radial_stretch_closed_form(spec):
    K = 2.0
    mu = BeltramiField.radial_stretch(K, spec)
    z = spec.inner_points()
    f = solve_bers(mu)
    assert np.max(np.abs(f.values - z * np.abs(z) ** (K - 1))) < 1e-3
    zo = spec.outer_points()
    assert np.max(np.abs(f.evaluate(zo) - zo)) < 1e-3
    g = solve_disk(mu)
    assert np.max(np.abs(g.values - z * np.abs(z) ** (K - 1))) < 1e-3
    t = g.boundary_map.theta
    assert np.max(np.abs(np.exp(1j * g.boundary_map.lift_samples) - np.exp(1j * t))) < 1e-6


def test_disk_constant_boundary_map(spec):
    g = solve_disk(BeltramiField.constant(0.1, spec))
    bm = g.boundary_map
    assert bm.is_monotone()
    d = bm.deriv_samples
    assert np.all(d > 0)
    # derivative periodic: the spline of the displacement closes up
    assert abs(bm.derivative(np.array([0.0]))[0] - bm.derivative(np.array([2 * np.pi]))[0]) < 1e-10
    # normalized to fix 1, i, -1
    fix = np.exp(1j * bm.lift(np.array([0.0, np.pi / 2, np.pi])))
    assert np.max(np.abs(fix - np.array([1, 1j, -1]))) < 1e-8


def test_disk_chart_error(spec):
    g = solve_disk(BeltramiField.constant(0.1, spec))
    with pytest.raises(ChartError):
        g.evaluate(np.array([2.0 + 0j]))
    with pytest.raises(ChartError):
        g.inverse_evaluate(np.array([1.5 + 0j]))


def test_budget_and_iteration_limits(coarse):
    with pytest.raises(BudgetError):
        solve_bers(BeltramiField.constant(0.97, coarse))
    with pytest.raises(SolverError):
        solve_bers(BeltramiField.from_callable(lambda z: 0.5 * z * np.conj(z) ** 2, coarse), max_iter=2)


def test_contraction_ratios_below_sup(spec):
    # a constant field is solved by the first term; use a varying one
    mu = BeltramiField.from_callable(lambda z: 0.2 * z + 0.1 * np.conj(z) ** 2, spec)
    f = solve_bers(mu)
    r = f.contraction_ratios
    assert len(r) > 3 and np.all(r <= mu.sup_bound + 1e-6)


def test_maximal_dilatation(spec):
    assert maximal_dilatation(BeltramiField.zero(spec)) == 1.0
    assert maximal_dilatation(1 / 3) == pytest.approx(2.0, rel=1e-14)
    assert maximal_dilatation(0.5) == pytest.approx(3.0, rel=1e-14)


def test_save(tmp_path, coarse):
    f = solve_bers(BeltramiField.constant(0.1, coarse))
    f.save(tmp_path, "m")
    assert sorted(p.name for p in tmp_path.iterdir()) == ["m.json", "m_inner.csv", "m_outer.csv"]


@pytest.mark.parametrize("k", [0.2j, 0.15 + 0.15j])
def test_disk_complex_constant_preserves_circle(spec, k):
    # complex nu is where the conjugate in the reflected coefficient matters
    g = solve_disk(BeltramiField.constant(k, spec))
    eps = 1 - spec.radii_inner[-1]
    assert np.max(np.abs(np.abs(g.values[-1]) - 1)) < 5 * eps
    assert g.dbar_residual < 1e-4
