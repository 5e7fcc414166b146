"""The acceptance criteria as runnable checks.

Each ``criterion_<k>`` returns ``{"criterion": k, "name", "passed", "details"}``
with JSON-ready details.  The test suite and ``teichkit suite`` both call
these functions; seeds are fixed so runs are reproducible.
"""

from __future__ import annotations

import time

import numpy as np

from . import fixtures as fx
from .beltrami import BeltramiField
from .bers import b_norm, bers_projection, pullback
from .circle import CircleMap
from .dynamics import koenigs_oracle, sternberg_linearize
from .extensions import ahlfors_weill, barycentric_extension, barycentric_point
from .foliation import check_base1, check_base2, coset_residual, mori_profile
from .grid import GridSpec
from .mobius import MobiusMap
from .solver import solve_disk


def _result(k, name, passed, **details):
    return {"criterion": k, "name": name, "passed": bool(passed), "details": details}


def criterion_1(spec=None, ks=(0.05, 0.1, 0.2)):
    """Constant coefficient: Phi(k) against -6k / (z^2 - k)^2."""
    spec = spec or GridSpec()
    zo = spec.outer_points()
    r = np.abs(zo)
    rows = []
    ok = True
    for k in ks:
        t0 = time.perf_counter()
        phi = bers_projection(BeltramiField.constant(k, spec))
        secs = time.perf_counter() - t0
        exact = -6 * k / (zo**2 - k) ** 2
        rel = np.abs(phi(zo) - exact) / np.abs(exact)
        far = float(rel[r >= 1.5].max())
        near = float(rel[(r >= 1.05) & (r < 1.5)].max())
        good = far < 1e-3 and near < 1e-2 and secs < 60
        ok &= good
        rows.append({"k": k, "rel_far": far, "rel_near": near, "seconds": round(secs, 2), "pass": good})
    return _result(1, "constant-coefficient oracle", ok, rows=rows, grid_hash=spec.grid_hash())


def criterion_2(spec=None, Ks=(1.5, 2.0)):
    """Radial stretches are in the trivial class: Phi vanishes."""
    spec = spec or GridSpec()
    rows = [{"K": K, "b_norm": b_norm(bers_projection(BeltramiField.radial_stretch(K, spec)))}
            for K in Ks]
    return _result(2, "radial-stretch triviality", all(r["b_norm"] < 5e-3 for r in rows),
                   rows=rows, grid_hash=spec.grid_hash())


def criterion_3(spec=None, n=100, seed=3):
    """Pointwise right-translation bound over random triples, identity at nu = 0."""
    spec = spec or GridSpec()
    rng = np.random.default_rng(seed)
    worst, worst_id = -np.inf, 0.0
    fails = 0
    for _ in range(n):
        m1, m2, nu = (fx.random_field(rng, spec, 0.3) for _ in range(3))
        rep = check_base2(m1, m2, nu)
        worst = max(worst, rep["max_violation"])
        worst_id = max(worst_id, rep["identity_residual"])
        fails += rep["verdict"] != "pass"
    zero = BeltramiField.zero(spec)
    id0 = 0.0
    for _ in range(3):
        m1, m2 = fx.random_field(rng, spec, 0.3), fx.random_field(rng, spec, 0.3)
        id0 = max(id0, check_base2(m1, m2, zero)["identity_residual"])
    ok = worst <= 5e-3 and fails == 0 and id0 <= 1e-8
    return _result(3, "right-translation bound", ok, triples=n, max_violation=worst,
                   identity_residual_nu0=id0, identity_residual_max=worst_id,
                   grid_hash=spec.grid_hash())


def criterion_4(spec=None, n=25, seed=4):
    """Schwarzian bound on the image domain over random pairs."""
    spec = spec or GridSpec()
    rng = np.random.default_rng(seed)
    ratios = []
    for _ in range(n):
        mu, nu = fx.random_field(rng, spec, 0.3), fx.random_field(rng, spec, 0.3)
        ratios.append(check_base1(mu, nu)["max_ratio"])
    return _result(4, "Schwarzian integral bound", max(ratios) <= 1 + 5e-2, pairs=n,
                   max_ratio=max(ratios), ratios=ratios, grid_hash=spec.grid_hash())


def criterion_5(spec=None, n=10, seed=5):
    """Ahlfors-Weill section followed by the Bers projection returns the form."""
    spec = spec or GridSpec()
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n):
        # sup |mu| = 2 b_norm for the section, so stay inside the solver budget
        phi = fx.random_form(rng, spec, rng.uniform(0.05, 0.45), name=f"form{i}")
        err = b_norm(bers_projection(ahlfors_weill(phi)) - phi)
        rows.append({"b_norm": b_norm(phi), "round_trip": err})
    return _result(5, "Ahlfors-Weill round trip", all(r["round_trip"] < 5e-3 for r in rows),
                   rows=rows, grid_hash=spec.grid_hash())


def criterion_6(spec=None, n=20, seed=6):
    """b_norm is invariant under Moebius pullback."""
    spec = spec or GridSpec()
    rng = np.random.default_rng(seed)
    diffs = []
    for _ in range(n):
        phi = fx.random_form(rng, spec, rng.uniform(0.1, 1.0))
        g = MobiusMap.random(rng)
        diffs.append(abs(b_norm(pullback(phi, g)) - b_norm(phi)))
    return _result(6, "pullback isometry", max(diffs) < 1e-6, max_difference=max(diffs),
                   grid_hash=spec.grid_hash())


def criterion_7(spec=None):
    """Coset inclusion evidence for every family and base point."""
    spec = spec or GridSpec()
    rows = []
    for nu_name in fx.BASE_POINTS:
        nu = fx.field(nu_name, spec)
        f_nu, phi_nu = solve_disk(nu), bers_projection(nu)
        for mu_name, space in fx.COSET_FAMILIES.items():
            rep = coset_residual(fx.field(mu_name, spec), nu, space, f_nu=f_nu, phi_nu=phi_nu)
            d = rep["delta"]
            rows.append({"mu": mu_name, "nu": nu_name, "space": space, "verdict": rep["verdict"],
                         "alpha_hat": d.get("alpha_hat"), "threshold": d.get("threshold"),
                         "a_p_norm": d.get("a_p_norm")})
    return _result(7, "coset inclusion evidence", all(r["verdict"] == "pass" for r in rows),
                   rows=rows, grid_hash=spec.grid_hash())


MORI_GENERAL = ("radial1.5", "radial2", "const0.2", "generic", "nu_z", "nu_zbar2", "nu_z3")


def criterion_8(spec=None, eps=0.15):
    """Mori window for all fixtures, near-isometric exponents for vanishing ones."""
    spec = spec or GridSpec()
    rows = []
    ok = True
    for name in MORI_GENERAL + tuple(fx.COSET_FAMILIES):
        f = solve_disk(fx.field(name, spec))
        rep = mori_profile(f)
        row = {"nu": name, "lower": rep["lower"], "upper": rep["upper"], "K": rep["K"],
               "mori": rep["verdict"]}
        good = rep["verdict"] == "pass"
        if name in fx.COSET_FAMILIES:
            fine = mori_profile(f, finest=3)
            row.update({"fine_lower": fine["lower"], "fine_upper": fine["upper"]})
            good &= 1 - eps <= fine["lower"] and fine["upper"] <= 1 + eps
        row["pass"] = bool(good)
        ok &= good
        rows.append(row)
    return _result(8, "Mori profiles", ok, rows=rows, grid_hash=spec.grid_hash())


def criterion_9():
    """Sternberg linearization against its analytic and brute-force checks."""
    g = fx.germ("quadratic")
    lin = sternberg_linearize(g)
    x, hk, flagged = koenigs_oracle(g.restrict(lin.delta), 40)
    koenigs = float(np.max(np.abs(lin(x) - hk)))
    # a second admissible delta: about half of the first, on the same nodes
    d2 = float(g.x[g.x <= lin.delta / 2][-1])
    lin2 = sternberg_linearize(g, delta=d2)
    shared = np.isin(lin.x, lin2.x)
    overlap = float(np.max(np.abs(lin.h[shared] - lin2.h)))
    rough = sternberg_linearize(fx.germ("c1.5"))
    checks = {
        "residual": lin.residual <= 1e-8 and rough.residual <= 1e-8,
        "taylor2": abs(lin.taylor2 - 0.4) <= 1e-3,
        "koenigs": koenigs <= 1e-6 and not flagged,
        "contraction": lin.contraction_factor <= lin.bound + 0.05
        and rough.contraction_factor <= rough.bound + 0.05,
        "uniqueness": overlap <= 1e-8,
    }
    return _result(9, "Sternberg linearization", all(checks.values()), checks=checks,
                   quadratic=lin.report(), c15=rough.report(), koenigs_difference=koenigs,
                   overlap=overlap)


def criterion_10(spec=None, n=10, seed=10):
    """Barycentric extension: Moebius reproduction and conformal naturality."""
    spec = spec or GridSpec.coarse()
    rng = np.random.default_rng(seed)
    M = MobiusMap.random(rng)
    ext = barycentric_extension(CircleMap.from_mobius(M), spec)
    repro = float(np.max(np.abs(ext.values - M(spec.inner_points()))))
    g = fx.circle_map("sine")
    nat = 0.0
    for _ in range(n):
        p1, p2 = MobiusMap.random(rng), MobiusMap.random(rng)
        h = CircleMap.compose_mobius(p1, g.precompose_mobius(p2))
        r = 0.95 * np.sqrt(rng.uniform(size=200))
        z = r * np.exp(2j * np.pi * rng.uniform(size=200))
        nat = max(nat, float(np.max(np.abs(barycentric_point(h, z) - p1(barycentric_point(g, p2(z)))))))
    return _result(10, "barycentric extension", repro <= 1e-6 and nat <= 1e-4,
                   mobius_reproduction=repro, naturality=nat, grid_hash=spec.grid_hash())


CRITERIA = {k: globals()[f"criterion_{k}"] for k in range(1, 11)}


def run(which=None, spec=None):
    """Run the selected criteria (all by default) in order."""
    out = []
    for k in sorted(which or CRITERIA):
        fn = CRITERIA[k]
        t0 = time.perf_counter()
        res = fn() if k == 9 else fn(spec) if spec is not None else fn()
        res["seconds"] = round(time.perf_counter() - t0, 1)
        out.append(res)
    return out


def summary_line(res):
    return f"criterion {res['criterion']:>2}  {'PASS' if res['passed'] else 'FAIL'}  {res['name']}"
