"""Affine-coset diagnostics and the quantitative lemmas behind them.

Every check returns a plain dict (JSON ready) with the inputs' grid hash,
the intermediate norms and a ``verdict`` field.  Empirical constants are
reported, never asserted against invented values.
"""

from __future__ import annotations

import numpy as np

from . import config
from .beltrami import (BeltramiField, boundary_profile, decay_exponent_field, holder_weighted_report,
                       in_bel0, maximal_dilatation, p_norm_report, product, right_translate)
from .bers import (QuadraticForm, a_p_report, b0_alpha_norm, b0_decay_profile, b_norm,
                   bers_projection, decay_exponent, in_b0)
from .grid import ArgumentError, hyperbolic_density_disk, hyperbolic_density_exterior, \
    log_log_slope_fit, polar_trapezoid_weights
from .solver import solve_bers, solve_disk


class PreconditionError(ValueError):
    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


SPACES = ("B0", "Ap", "B0alpha", "B0posAlpha")


def _parse_space(space):
    """'B0', ('Ap', 2), ('B0alpha', 0.3), 'Ap:4', 'B0alpha:0.5' ..."""
    if isinstance(space, str):
        name, _, par = space.partition(":")
        par = float(par) if par else None
    else:
        name, par = space[0], (float(space[1]) if len(space) > 1 else None)
    if name not in SPACES:
        raise ArgumentError(f"unknown space {name!r}")
    if name != "B0" and par is None:
        raise ArgumentError(f"space {name} needs a parameter")
    return name, par


def field_membership(mu: BeltramiField, space):
    """Membership evidence of a Beltrami field in Bel_0, A^p, Bel_0^alpha, Bel_0^{>alpha}."""
    name, par = _parse_space(space)
    if name == "B0":
        rep = in_bel0(mu)
        return rep["member"], rep
    if name == "Ap":
        rep = p_norm_report(mu, par)
        return rep["finite"], {"p_norm": rep["value"], "finite": rep["finite"]}
    if name == "B0alpha":
        rep = holder_weighted_report(mu, par)
        return rep["finite"], {"holder_norm": rep["value"], "slope": rep["slope"]}
    a, r2 = decay_exponent_field(mu)
    ok = a > par + config.get("pos_alpha_margin")
    return bool(ok), {"field_exponent": a, "r2": r2}


def form_membership(delta: QuadraticForm, space, K=1.0):
    """Membership evidence of a quadratic form in B_0, A^p, B_0^alpha, B_0^{>alpha}.

    For the Hoelder spaces the exponent threshold is alpha / K^2 - 0.1 (the
    exponent loss of a K-quasiconformal base point change), and for the
    ">alpha" family additionally alpha_hat must exceed the configured margin.
    """
    name, par = _parse_space(space)
    prof = b0_decay_profile(delta)
    rep = {"b_norm": b_norm(delta), "decay_profile": prof}
    if name == "B0":
        ok = in_b0(delta)["member"]
    elif name == "Ap":
        ap = a_p_report(delta, max(par, 2.0))
        rep["a_p_norm"] = ap["value"]
        ok = ap["finite"]
    else:
        ah, r2, lower = decay_exponent(delta, prof)
        thr = par / K**2 - 0.1
        rep.update({"alpha_hat": ah, "fit_r2": r2, "lower_bound_only": lower, "threshold": thr})
        if name == "B0alpha":
            rep["b0_alpha_norm"] = b0_alpha_norm(delta, min(max(par / K**2, 1e-3), 0.999))
            ok = ah >= thr
        else:
            ok = ah >= thr and ah > config.get("pos_alpha_margin")
    return bool(ok), rep


def coset_residual(mu: BeltramiField, nu: BeltramiField, space, f_nu=None, phi_nu=None):
    """Delta = Phi(mu * nu) - Phi(nu) and its membership evidence in ``space``.

    ``mu * nu = r_nu^{-1}(mu)`` is the dilatation of f^mu o f^nu.  Passing
    the solved map of nu and Phi(nu) lets batches reuse them.
    """
    name, par = _parse_space(space)
    ok_mu, mu_rep = field_membership(mu, space)
    if not ok_mu:
        raise PreconditionError(f"mu is not in {name} by its diagnostic", mu_rep)
    f_nu = f_nu or solve_disk(nu)
    phi_nu = phi_nu or bers_projection(nu)
    mn = product(mu, nu, f_nu, name=f"{mu.name}*{nu.name}")
    delta = bers_projection(mn) - phi_nu
    K = maximal_dilatation(nu)
    ok, rep = form_membership(delta, space, K)
    return {
        "space": name, "parameter": par, "mu": mu.name, "nu": nu.name,
        "grid_hash": mu.spec.grid_hash(), "K_nu": K,
        "mu_membership": mu_rep, "product_sup": mn.sup_bound,
        "delta": rep, "verdict": "pass" if ok else "fail",
    }


def check_base2(mu1: BeltramiField, mu2: BeltramiField, nu: BeltramiField, f_nu=None):
    """|r_nu(mu1) - r_nu(mu2)| <= |mu1 - mu2| / sqrt((1-|mu1|^2)(1-|mu2|^2)) on the grid,
    plus the exact middle identity of the proof."""
    f_nu = f_nu or solve_disk(nu)
    z, _ = f_nu.grid_preimages()
    r1 = right_translate(mu1, nu, f_nu).values
    r2 = right_translate(mu2, nu, f_nu).values
    m1, m2, v = mu1(z), mu2(z), nu(z)
    lhs = np.abs(r1 - r2)
    bound = np.abs(m1 - m2) / np.sqrt((1 - np.abs(m1) ** 2) * (1 - np.abs(m2) ** 2))
    middle = np.abs(m1 - m2) * (1 - np.abs(v) ** 2) / (np.abs(1 - np.conj(v) * m1) * np.abs(1 - np.conj(v) * m2))
    viol = float(np.max(lhs - bound))
    ident = float(np.max(np.abs(lhs - middle)))
    return {"max_violation": viol, "identity_residual": ident,
            "verdict": "pass" if viol <= config.get("base2_tol") else "fail",
            "grid_hash": nu.spec.grid_hash()}


def check_base1(mu: BeltramiField, nu: BeltramiField, f_mu=None, f_nu=None, r_min=1.05,
                angle_stride=4):
    """Schwarzian of f_mu o f_nu^{-1} on Omega* against the integral bound.

    Samples zeta = f_nu(z') for z' on the exterior circles with |z'| >= r_min.
    The left side uses S_{F o G^{-1}}(G(z')) = (S_F - S_G)(z') / G'(z')^2;
    the right side is the area integral pulled back to the disk with the
    Jacobian of f_nu, rho_{Omega*}(zeta) = rho_{D*}(z') / |f_nu'(z')|.
    """
    f_mu = f_mu or solve_bers(mu)
    f_nu = f_nu or solve_bers(nu)
    spec = mu.spec
    diff = bers_projection(mu, f_mu) - bers_projection(nu, f_nu)
    zo = spec.outer_points()
    zo = zo[np.abs(zo[:, 0]) >= r_min][:, ::angle_stride].ravel()
    d = f_nu.dz(zo)
    lhs = np.abs(diff(zo)) / np.abs(d) ** 2
    rho = hyperbolic_density_exterior(zo) / np.abs(d)
    # area integral over the disk
    z = spec.inner_points()
    m, v = mu.values, nu.values
    dens = np.abs(m - v) ** 2 / ((1 - np.abs(m) ** 2) * (1 - np.abs(v) ** 2))
    J = np.abs(f_nu.dz_values) ** 2 - np.abs(f_nu.dzbar_values) ** 2
    fz = f_nu.values
    wts = polar_trapezoid_weights(spec.radii_inner) * (2 * np.pi / spec.n_theta)
    integrand = (dens * J * wts[:, None]).ravel()
    fz = fz.ravel()
    zeta = f_nu.evaluate(zo)
    integral = np.empty(len(zo))
    for i in range(0, len(zo), 256):
        dz_ = zeta[i:i + 256, None] - fz[None, :]
        integral[i:i + 256] = np.sum(integrand[None, :] / np.abs(dz_) ** 4, axis=1)
    rhs = 3 * rho / np.sqrt(np.pi) * np.sqrt(integral)
    ok = rhs > 0
    ratio = np.where(ok, lhs / np.where(ok, rhs, 1), np.where(lhs > 1e-14, np.inf, 0.0))
    dropped = int(np.sum(~np.isfinite(integral)))
    mx = float(np.max(ratio)) if ratio.size else 0.0
    return {"lhs": lhs, "rhs": rhs, "max_ratio": mx, "samples": int(len(zo)), "dropped": dropped,
            "verdict": "pass" if mx <= 1 + config.get("base1_tol") else "fail",
            "grid_hash": spec.grid_hash()}


def _pushforward_p_norm(vals, f, p):
    """int over the disk of |v(f(z))|^p rho_D(f(z))^2 J_f(z) dA(z) for samples v(f(z))."""
    spec = f.spec
    J = np.abs(f.dz_values) ** 2 - np.abs(f.dzbar_values) ** 2
    rho2 = hyperbolic_density_disk(np.clip(np.abs(f.values), 0, 1 - 1e-15)) ** 2
    w = polar_trapezoid_weights(spec.radii_inner) * (2 * np.pi / spec.n_theta)
    return float(np.sum(np.abs(vals) ** p * rho2 * J * w[:, None]))


def check_claims_p(mu: BeltramiField, nu: BeltramiField, p: float = 2.0, mu_prime=None):
    """Empirical constants for the two p-integrability claims.

    Claim 1 shape: ||Phi(mu) - Phi(mu')||_p against ||mu - mu'||_p, with mu'
    the barycentric representative of the class of mu by default.
    Claim 2 shape: ||r_nu(mu) - r_nu(mu')||_p against ||mu - mu'||_p; the left
    side is pulled back to the source disk through f^nu (change of variables).
    """
    if p < 2:
        raise ArgumentError("p must be >= 2")
    spec = mu.spec
    if mu_prime is None:
        from .extensions import barycentric_extension

        g = solve_disk(mu).boundary_map
        mu_prime = barycentric_extension(g, spec).field
    d = BeltramiField.from_values((mu.values - mu_prime.values) * 0.5, spec)
    # ||mu - mu'||_p computed directly (the difference may exceed 1 pointwise in general)
    base = p_norm_report(d, p)
    dn = 2 * base["value"] if base["finite"] else float("inf")
    lhs1 = a_p_report(bers_projection(mu) - bers_projection(mu_prime), p)["value"]
    f_nu = solve_disk(nu)
    # r_nu(mu_i) at f(z): difference quotient times the unimodular factor
    fz = f_nu.dz_values
    tau = fz / np.conj(fz)
    v = nu.values
    r1 = (mu.values - v) / (1 - np.conj(v) * mu.values) * tau
    r2 = (mu_prime.values - v) / (1 - np.conj(v) * mu_prime.values) * tau
    lhs2 = _pushforward_p_norm(r1 - r2, f_nu, p) ** (1.0 / p)
    src = float(np.sum(np.abs(mu.values - mu_prime.values) ** p
                       * hyperbolic_density_disk(np.asarray(spec.radii_inner))[:, None] ** 2
                       * polar_trapezoid_weights(spec.radii_inner)[:, None] * (2 * np.pi / spec.n_theta))) ** (1.0 / p)
    c1 = lhs1 / dn if dn and np.isfinite(dn) else (0.0 if lhs1 == 0 else float("inf"))
    c2 = lhs2 / src if src else (1.0 if lhs2 == 0 else float("inf"))
    return {"p": p, "claim1": {"lhs": lhs1, "rhs_without_constant": dn, "implied_constant": c1},
            "claim2": {"lhs": lhs2, "rhs_without_constant": src, "implied_constant": c2},
            "finite": bool(np.isfinite(c1) and np.isfinite(c2)), "grid_hash": spec.grid_hash()}


def mori_profile(f, offsets=None, n_rays=16, finest=None):
    """Exponents a with 1 - |f(z)| ~ (1 - |z|)^a along radial rays.

    Returns a report with the per-ray fitted exponents, their min / max and
    the Mori window [1/K, K] for K the maximal dilatation of the source.
    ``finest`` restricts the fit to the finest ladder points.
    """
    if f.kind != "disk_self_map":
        raise ArgumentError("mori_profile needs a disk self-map")
    spec = f.spec
    offsets = list(spec.boundary_offsets if offsets is None else offsets)
    if finest:
        offsets = offsets[-max(finest, 3):]
    if len(offsets) < 3:
        return {"status": "indeterminate", "reason": "fewer than 3 ladder points"}
    th = 2 * np.pi * np.arange(n_rays) / n_rays
    exps = []
    for t in th:
        z = (1 - np.asarray(offsets)) * np.exp(1j * t)
        d = 1 - np.abs(f.evaluate(z))
        if np.any(d <= 0):
            return {"status": "indeterminate", "reason": "image on or outside the circle"}
        x, y = np.log(offsets), np.log(d)
        exps.append(float(np.polyfit(x, y, 1)[0]))
    K = maximal_dilatation(f.source)
    lo, hi = float(min(exps)), float(max(exps))
    m = config.get("mori_margin")
    ok = (1 / K - m <= lo) and (hi <= K + m)
    return {"status": "evaluated", "exponents": exps, "lower": lo, "upper": hi, "K": K,
            "window": [1 / K, K], "verdict": "pass" if ok else "fail",
            "offsets": [float(e) for e in offsets]}
