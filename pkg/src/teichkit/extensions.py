"""Barycentric (Douady-Earle) extension, the Ahlfors-Weill section and the
regularity report for circle maps."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import config
from .beltrami import BeltramiField, boundary_profile, in_bel0
from .bers import QuadraticForm, b_norm, b0_decay_profile, bers_projection, decay_exponent, in_b0
from .circle import CircleMap
from .grid import ArgumentError, GridSpec, hyperbolic_density_disk, holder_ladder

__all__ = ["CircleMap", "ExtensionError", "OutOfRangeError", "BarycentricExtension",
           "barycentric_point", "barycentric_extension", "ahlfors_weill", "aw_pointwise_ratio",
           "classify_regularity"]


class ExtensionError(RuntimeError):
    def __init__(self, msg, z=None):
        super().__init__(msg)
        self.z = z


class OutOfRangeError(ValueError):
    pass


def _nodes(n):
    return np.exp(2j * np.pi * np.arange(n) / n)


def barycentric_point(g: CircleMap, z, nodes=None, tol=None, max_iter=100, derivatives=False):
    """Douady-Earle extension of g at points z of the disk.

    w solves mean_t K_w(g(M_z(e^{it}))) = 0, K_w(u) = (u - w)/(1 - conj(w) u),
    M_z(e) = (e + z)/(1 + conj(z) e): the conformal barycenter of the image
    of harmonic measure at z.  With ``derivatives`` also returns (w_z, w_zbar)
    from the implicit function theorem; the z-derivatives of the defining
    equation act on the Poisson kernel only, so g' is not needed.
    """
    nodes = config.get("de_nodes") if nodes is None else nodes
    tol = config.get("de_tol") if tol is None else tol
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    shape = z.shape
    z = z.ravel()
    e = _nodes(nodes)
    W = np.empty(len(z), dtype=complex)
    WZ = np.empty(len(z), dtype=complex)
    WZB = np.empty(len(z), dtype=complex)
    chunk = max(1, 2**21 // nodes)
    for i0 in range(0, len(z), chunk):
        zc = z[i0:i0 + chunk, None]
        zeta = (e[None, :] + zc) / (1 + np.conj(zc) * e[None, :])
        u = g(zeta)
        w = np.mean(u, axis=1)  # harmonic extension as the starting point
        for it in range(max_iter):
            # recentre: v = K_w(u) and solve for the correction c at c = 0,
            # where the linearization c - mean(v^2) conj(c) = mean(v) is well
            # conditioned even when w is close to the circle
            v = (u - w[:, None]) / (1.0 - np.conj(w)[:, None] * u)
            F = v.mean(axis=1)
            # F is a hyperbolic displacement; rounding in 1 - conj(w) u puts
            # its floor near eps / (1 - |w|^2)
            floor = 64 * np.finfo(float).eps / (1.0 - np.abs(w) ** 2)
            if np.all(np.abs(F) < np.maximum(tol, floor)):
                break
            B = np.mean(v * v, axis=1)
            c = (F + B * np.conj(F)) / (1.0 - np.abs(B) ** 2)
            big = np.abs(c) > 0.5
            c[big] *= 0.5 / np.abs(c[big])
            w = (w + c) / (1.0 + np.conj(w) * c)
        else:
            bad = np.argmax(np.abs(F))
            raise ExtensionError(f"barycenter Newton failed (|F| = {np.abs(F).max():.2e})",
                                 z=complex(zc[bad, 0]))
        W[i0:i0 + chunk] = w
        if derivatives:
            den = 1.0 - np.conj(w)[:, None] * u
            K = (u - w[:, None]) / den
            A = np.mean(-1.0 / den, axis=1)
            B = np.mean((u - w[:, None]) * u / den**2, axis=1)
            kern = (1 - np.conj(zc) * zeta) / ((1 - np.abs(zc) ** 2) * (zeta - zc))
            C = np.mean(K * kern, axis=1)
            D = np.mean(K * np.conj(kern), axis=1)
            det = np.abs(A) ** 2 - np.abs(B) ** 2
            WZ[i0:i0 + chunk] = (-C * np.conj(A) + B * np.conj(D)) / det
            WZB[i0:i0 + chunk] = np.conj((-A * np.conj(D) + np.conj(B) * C) / det)
    if derivatives:
        return W.reshape(shape), WZ.reshape(shape), WZB.reshape(shape)
    return W.reshape(shape)


@dataclass(frozen=True)
class BarycentricExtension:
    """Barycentric extension sampled on the disk grid."""

    boundary: CircleMap
    values: np.ndarray
    dz_values: np.ndarray
    dzbar_values: np.ndarray
    field: BeltramiField = field(repr=False)

    def evaluate(self, z):
        """Pointwise solve at arbitrary points (exact up to the barycenter tolerance)."""
        return barycentric_point(self.boundary, z)

    def jacobian_constant(self):
        """max rho_D(e(z))^2 J(z) / rho_D(z)^2 over the grid."""
        z = self.field.samples.points()
        J = np.abs(self.dz_values) ** 2 - np.abs(self.dzbar_values) ** 2
        w = np.clip(np.abs(self.values), 0, 1 - 1e-16)
        ratio = (1 - np.abs(z) ** 2) ** 2 / (1 - w**2) ** 2 * J
        return float(ratio.max())


def barycentric_extension(g: CircleMap, spec: GridSpec = None, nodes=None) -> BarycentricExtension:
    """Extension on the grid of ``spec`` together with its Beltrami field."""
    spec = spec or GridSpec.coarse()
    z = spec.inner_points()
    w, wz, wzb = barycentric_point(g, z, nodes=nodes, derivatives=True)
    mu = wzb / wz
    if np.any(np.abs(mu) >= 1):
        raise ExtensionError("extension is not orientation preserving on the grid")
    bound = g

    def mu_func(pts):
        _, a, b = barycentric_point(bound, pts, nodes=nodes, derivatives=True)
        return b / a

    fld = BeltramiField.from_values(mu, spec, "barycentric")
    object.__setattr__(fld, "func", mu_func)
    return BarycentricExtension(g, w, wz, wzb, fld)


# Ahlfors-Weill -----------------------------------------------------------------

def ahlfors_weill(phi: QuadraticForm, spec: GridSpec = None, check=True) -> BeltramiField:
    """mu(z) = -(1/2)(1 - |z|^2)^2 conj(z)^(-4) phi(1/conj z) on the disk.

    In the chart w = 1/z this is mu(z) = -(1/2)(1 - |z|^2)^2 phi_w(conj z).
    Requires b_norm(phi) below the configured threshold (1/2 in the
    rho^(-2)|phi| normalization, which is where |mu| < 1 is guaranteed).
    """
    spec = spec or phi.spec
    if check:
        bn = b_norm(phi)
        thr = config.get("aw_threshold")
        if bn >= thr:
            raise OutOfRangeError(f"b_norm(phi) = {bn:.4f} >= {thr}")
    wf = phi.wfunc

    def mu(z):
        z = np.asarray(z, dtype=complex)
        return -0.5 * (1 - np.abs(z) ** 2) ** 2 * wf(np.conj(z))

    return BeltramiField.from_callable(mu, spec, f"AW[{phi.name}]")


def aw_pointwise_ratio(mu: BeltramiField, phi: QuadraticForm):
    """max over the grid of |mu(z)| / (rho_{D*}^(-2)(z*) |phi(z*)|), z* = 1/conj z."""
    z = mu.samples.points()
    w = np.conj(z)  # chart coordinate of the reflected point
    den = 0.25 * (1 - np.abs(w) ** 2) ** 2 * np.abs(phi.wfunc(w))
    ok = den > 1e-300
    return float(np.max(np.abs(mu.values)[ok] / den[ok])) if ok.any() else 0.0


# regularity report ---------------------------------------------------------------

def classify_regularity(g: CircleMap, spec: GridSpec = None, alphas=None, de_spec=None):
    """Three-channel report: barycentric field vanishing, Schwarzian decay,
    Hoelder ladder of g'.  Channels that cannot be evaluated are marked
    indeterminate instead of failing the report."""
    spec = spec or GridSpec()
    alphas = alphas or [round(0.1 * i, 1) for i in range(1, 10)]
    report = {}
    try:
        ext = barycentric_extension(g, de_spec or spec)
        fld = ext.field
        report["vanishing_profile"] = boundary_profile(fld.values, fld.spec)
        report["field_vanishes"] = in_bel0(fld)["member"]
        report["field_sup"] = fld.sup_bound
        report["jacobian_constant"] = ext.jacobian_constant()
        phi = bers_projection(fld if fld.spec == spec else
                              BeltramiField.from_callable(fld.func, spec, "barycentric"))
        prof = b0_decay_profile(phi)
        report["decay_profile"] = prof
        ah = decay_exponent(phi, prof)
        report["alpha_hat"] = ah[0]
        report["alpha_hat_lower_bound_only"] = bool(ah[2])
        report["form_vanishes"] = in_b0(phi)["member"]
        report["b_norm"] = b_norm(phi)
    except Exception as exc:  # channel-level failure is part of the report
        report["extension_error"] = f"{type(exc).__name__}: {exc}"
        report.setdefault("field_vanishes", None)
        report.setdefault("form_vanishes", None)
    consts, bounded, est = holder_ladder(g.deriv_samples, 2 * np.pi / g.n, alphas)
    report["holder_ladder"] = {str(a): consts[a] for a in alphas}
    report["holder_bounded"] = {str(a): bounded[a] for a in alphas}
    report["holder_exponent_estimate"] = est
    fv, pv = report["field_vanishes"], report["form_vanishes"]
    if fv is None or pv is None:
        report["symmetric_evidence"] = "indeterminate"
        report["consistent"] = None
    else:
        report["symmetric_evidence"] = "symmetric" if (fv and pv) else (
            "not symmetric" if not (fv or pv) else "mixed")
        report["consistent"] = bool(fv == pv)
    return report
