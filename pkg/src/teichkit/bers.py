"""Schwarzian derivatives, the Bers projection and norms of quadratic forms.

Quadratic forms on the exterior disk are handled in the chart ``w = 1/z``:
a form phi is represented by ``phi_w(w) = phi(1/w) w^(-4)``, holomorphic on
the closed-or-open unit disk including w = 0 (z = infinity).  Since
``rho_{D*}(z)^(-2) |phi(z)| = rho_D(w)^(-2) |phi_w(w)|`` every weighted norm is
a weighted norm on the disk in w.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize

from . import config
from .beltrami import BeltramiField, _shell_sums, _tail_verdict
from .grid import ArgumentError, ComplexGridFunction, GridSpec, log_log_slope_fit
from .mobius import MobiusMap


class BranchError(ArithmeticError):
    """f' vanishes (numerically) at a point of the exterior disk."""


def _weight_w(w):
    """rho_D(w)^(-2) = ((1 - |w|^2) / 2)^2."""
    return (0.25 * (1.0 - np.abs(w) ** 2) ** 2)


@dataclass(frozen=True)
class QuadraticForm:
    """Holomorphic quadratic form on the exterior disk.

    ``wfunc`` evaluates the form in the chart w = 1/z.  ``eps_min`` is the
    smallest distance to the circle at which the representation is trusted
    (a truncated Laurent series cannot resolve finer scales).
    """

    spec: GridSpec
    wfunc: Callable = field(compare=False, repr=False)
    name: str = ""
    eps_min: float = 0.0

    def __call__(self, z):
        """phi(z) for |z| > 1."""
        z = np.asarray(z, dtype=complex)
        return self.wfunc(1.0 / z) / z**4

    def at_w(self, w):
        return self.wfunc(np.asarray(w, dtype=complex))

    def weighted(self, z):
        """rho_{D*}^(-2) |phi| at points of the exterior disk."""
        w = 1.0 / np.asarray(z, dtype=complex)
        return _weight_w(w) * np.abs(self.wfunc(w))

    @property
    def samples(self) -> ComplexGridFunction:
        return ComplexGridFunction(self.spec, self(self.spec.outer_points()), "exterior")

    def __sub__(self, other):
        f, g = self.wfunc, other.wfunc
        return QuadraticForm(self.spec, lambda w: f(w) - g(w), f"{self.name}-{other.name}",
                             max(self.eps_min, other.eps_min))

    def __add__(self, other):
        f, g = self.wfunc, other.wfunc
        return QuadraticForm(self.spec, lambda w: f(w) + g(w), f"{self.name}+{other.name}",
                             max(self.eps_min, other.eps_min))

    def scale(self, c):
        f = self.wfunc
        return QuadraticForm(self.spec, lambda w: c * f(w), self.name, self.eps_min)

    # constructors
    @classmethod
    def zero(cls, spec=None):
        return cls(spec or GridSpec(), lambda w: np.zeros_like(np.asarray(w, dtype=complex)), "zero")

    @classmethod
    def from_z_callable(cls, phi, spec=None, name=""):
        """From phi(z); the chart value at w = 0 is taken as a limit."""

        def wf(w):
            w = np.asarray(w, dtype=complex)
            small = np.abs(w) < 1e-8
            ws = np.where(small, 1e-8, w)
            return phi(1.0 / ws) / ws**4

        return cls(spec or GridSpec(), wf, name)

    @classmethod
    def monomials(cls, coeffs, spec=None, name=""):
        """phi = sum_j coeffs[j] z^(-4-j), i.e. phi_w = sum_j coeffs[j] w^j."""
        c = np.asarray(coeffs, dtype=complex)
        return cls(spec or GridSpec(), lambda w: np.polyval(c[::-1], np.asarray(w, dtype=complex)),
                   name or "poly")

    def holomorphy_residual(self):
        """Max |dphi/dzbar| / max |phi| by finite differences on the exterior circles."""
        spec = self.spec
        r = np.asarray(spec.radii_outer)
        n = spec.n_theta
        F = self(spec.outer_points())
        dt = 2 * np.pi / n
        Ft = (8 * (np.roll(F, -1, 1) - np.roll(F, 1, 1)) - (np.roll(F, -2, 1) - np.roll(F, 2, 1))) / (12 * dt)
        h = 1e-5 * r
        Fr = (self((r + h)[:, None] * np.exp(1j * spec.theta)) - self((r - h)[:, None] * np.exp(1j * spec.theta))) / (2 * h[:, None])
        e = np.exp(1j * spec.theta)[None, :]
        dbar = 0.5 * e * (Fr + 1j * Ft / r[:, None])
        scale = max(float(np.abs(F).max()), 1e-300)
        return float(np.abs(dbar).max() / scale)

    def to_csv(self, path):
        path = Path(path)
        self.samples.to_csv(path)
        meta = {"b_norm": b_norm(self), "decay_profile": b0_decay_profile(self),
                "alpha_hat": decay_exponent(self)[0], "grid_hash": self.spec.grid_hash(),
                "name": self.name}
        path.with_suffix(".json").write_text(json.dumps(meta, sort_keys=True, indent=1))


# Schwarzian ------------------------------------------------------------------

def _laurent_schwarzian_w(a):
    """phi_w(w) for F(z) = z + sum_k a_k z^(-k-1).

    With D(w) = 1 + sum_k a_k w^(k+2) the chart map is G(w) = 1 / F(1/w) = w / D;
    S_G = L' - L^2/2 with L = G''/G' = -w D''/N - 2 D'/D, N = D - w D'.
    """
    a = np.asarray(a, dtype=complex)
    # coefficient arrays (highest power first for polyval) of D and derivatives
    cD = np.concatenate([a[::-1], [0.0, 1.0]])
    c1 = np.polyder(cD)
    c2 = np.polyder(c1)
    c3 = np.polyder(c2)

    def wfunc(w):
        w = np.asarray(w, dtype=complex)
        D, D1, D2, D3 = (np.polyval(c, w) for c in (cD, c1, c2, c3))
        N = D - w * D1
        if np.any(np.abs(N) < 1e-12) or np.any(np.abs(D) < 1e-12):
            raise BranchError("derivative of the solved map vanishes on the exterior disk")
        Lp = (-(D2 + w * D3) / N - (w * D2 / N) ** 2 - 2 * D2 / D + 2 * (D1 / D) ** 2)
        L = -w * D2 / N - 2 * D1 / D
        return Lp - 0.5 * L * L

    return wfunc


def schwarzian(f) -> QuadraticForm:
    """Schwarzian of a solved map of kind ``bers`` on the exterior disk."""
    if f.kind != "bers":
        raise ArgumentError("schwarzian needs a map conformal on the exterior disk (kind bers)")
    wf = _laurent_schwarzian_w(f.laurent)
    spec = f.spec
    # probe the grid for critical points
    wf(spec.inner_points())
    return QuadraticForm(spec, wf, f"S[{f.source.name}]", _trusted_eps(f.laurent, wf, spec))


def _trusted_eps(a, wf, spec, rel=1e-2):
    """Smallest ladder offset at which the last quarter of the Laurent
    coefficients changes the weighted Schwarzian by less than ``rel``."""
    a = np.abs(np.asarray(a))
    k = np.arange(len(a))
    tail = k >= 3 * len(a) // 4
    th = spec.theta
    trusted = 0.0
    for eps in spec.boundary_offsets:
        rho = 1.0 / (1.0 + eps)
        w = rho * np.exp(-1j * th)
        val = np.max(_weight_w(w) * np.abs(wf(w)))
        # third-derivative growth (k+2)^3 bounds the Schwarzian contribution
        err = _weight_w(rho) * np.sum(((k + 2.0) ** 3 * a * rho ** k)[tail])
        if err > rel * max(val, 1e-300) and err > 1e-14:
            return trusted if trusted else float(eps)
        trusted = float(eps)
    return 0.0


def derivatives_cauchy(func, z, radius, nodes=64, order=3):
    """f, f', ..., f^(order) at z from trapezoid Cauchy integrals on a circle."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    radius = np.broadcast_to(np.asarray(radius, dtype=float), z.shape)
    t = 2 * np.pi * np.arange(nodes) / nodes
    e = np.exp(1j * t)
    vals = func(z[:, None] + radius[:, None] * e[None, :])
    coef = np.fft.fft(vals, axis=1) / nodes  # Taylor coefficients times radius^m
    out = []
    fact = 1.0
    for m in range(order + 1):
        if m:
            fact *= m
        out.append(fact * coef[:, m] / radius**m)
    return out


def schwarzian_numeric(func, z, radius=None, nodes=64):
    """S_f(z) of an analytic callable via Cauchy-integral differentiation.

    The default radius is half the distance to the unit circle.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if radius is None:
        radius = 0.5 * (np.abs(z) - 1.0)
    _, d1, d2, d3 = derivatives_cauchy(func, z, radius, nodes)
    return d3 / d1 - 1.5 * (d2 / d1) ** 2


def bers_projection(mu: BeltramiField, f=None) -> QuadraticForm:
    """Phi(mu): Schwarzian of the solved map with mu on the disk, conformal outside."""
    if f is None:
        from .solver import solve_bers

        f = solve_bers(mu)
    q = schwarzian(f)
    return QuadraticForm(q.spec, q.wfunc, f"Phi[{mu.name}]", q.eps_min)


# norms -----------------------------------------------------------------------

def _w_grid(spec):
    w = spec.inner_points().ravel()
    return np.concatenate([[0j], w])


def b_norm(phi: QuadraticForm, refine=True) -> float:
    """sup over the exterior disk of rho^(-2) |phi| (grid max, then local refinement)."""
    w = _w_grid(phi.spec)
    vals = _weight_w(w) * np.abs(phi.wfunc(w))
    best = float(vals.max())
    if not refine or best == 0.0:
        return best

    def neg(x):
        ww = complex(x[0], x[1])
        if abs(ww) >= 1:
            return 0.0
        return -float(_weight_w(ww) * abs(phi.wfunc(np.array([ww]))[0]))

    order = np.argsort(vals)[::-1]
    seeds = []
    for i in order:
        if all(abs(w[i] - s) > 0.05 for s in seeds):
            seeds.append(w[i])
        if len(seeds) >= 4 or vals[i] < 0.5 * best:
            break
    for s in seeds:
        res = minimize(neg, [s.real, s.imag], method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 2000})
        best = max(best, -float(res.fun))
    return best


def b0_decay_profile(phi: QuadraticForm, offsets=None):
    """(eps_j, max rho^(-2)|phi| on |z| = 1 + eps_j), restricted to trusted scales."""
    spec = phi.spec
    offsets = spec.boundary_offsets if offsets is None else offsets
    th = spec.theta
    out = []
    for eps in offsets:
        if eps < phi.eps_min:
            continue
        w = np.exp(-1j * th) / (1.0 + eps)
        out.append((float(eps), float(np.max(_weight_w(w) * np.abs(phi.wfunc(w))))))
    return out


def decay_exponent(phi: QuadraticForm, profile=None):
    """(alpha_hat, r^2) from the log-log slope of the decay profile.

    Values under the numerical floor turn the estimate into a lower bound,
    flagged by a third entry ``True``.
    """
    prof = b0_decay_profile(phi) if profile is None else profile
    floor = config.get("decay_floor")
    good = [p for p in prof if p[1] > floor]
    if len(good) < 4:
        if all(p[1] <= floor for p in prof):
            return float("inf"), 1.0, True
        raise ArgumentError("decay profile positive on fewer than 4 annuli")
    # finest scales: the profile is a power law only asymptotically
    slope, r2 = log_log_slope_fit(good[-4:])
    return slope, r2, len(good) < len(prof)


def b0_alpha_norm(phi: QuadraticForm, alpha: float, slope_min=None) -> float:
    """sup rho^(-2+alpha) |phi|; +inf when the weighted profile keeps growing."""
    if not 0 < alpha < 1:
        raise ArgumentError("alpha must lie in (0, 1)")
    slope_min = config.get("growth_slope") if slope_min is None else slope_min
    w = _w_grid(phi.spec)
    eps_ok = np.abs(w) <= 1.0 / (1.0 + phi.eps_min) if phi.eps_min else np.ones(len(w), bool)
    w = w[eps_ok]
    rho = 2.0 / (1.0 - np.abs(w) ** 2)
    val = float(np.max(rho**alpha * _weight_w(w) * np.abs(phi.wfunc(w))))
    prof = [(e, v * (2.0 / (e * (2 + e))) ** alpha) for e, v in b0_decay_profile(phi)]
    prof = [p for p in prof if p[1] > config.get("decay_floor")]
    if len(prof) >= 4:
        slope, _ = log_log_slope_fit(prof[-4:])
        if slope < -slope_min:
            return float("inf")
    return val


def a_p_report(phi: QuadraticForm, p: float):
    """int over the exterior disk of rho^(2-2p) |phi|^p, computed in the w chart."""
    if p < 2:
        raise ArgumentError("p must be >= 2")
    spec = phi.spec
    r = np.asarray(spec.radii_inner)
    if phi.eps_min:
        r = r[r <= 1.0 / (1.0 + phi.eps_min)]
    w = r[:, None] * np.exp(1j * spec.theta)[None, :]
    rho2 = (2.0 / (1.0 - r**2)) ** 2
    radial = rho2 * np.mean((_weight_w(w) * np.abs(phi.wfunc(w))) ** p, axis=1)
    if np.all(radial == 0):
        return {"value": 0.0, "finite": True, "shells": []}
    total, shells = _shell_sums(r, radial)
    finite, tail = _tail_verdict(shells, config.get("shell_ratio_max"))
    val = (total + tail) ** (1.0 / p) if finite else float("inf")
    return {"value": val, "finite": finite, "shells": [float(x) for x in shells], "tail": tail}


def a_p_norm(phi: QuadraticForm, p: float) -> float:
    return a_p_report(phi, p)["value"]


def in_b0(phi: QuadraticForm, ratio=None):
    """Decay-profile evidence for vanishing at the boundary."""
    ratio = config.get("b0_ratio") if ratio is None else ratio
    prof = b0_decay_profile(phi)
    vals = [v for _, v in prof]
    if not vals or max(vals) <= config.get("decay_floor") * 1e3:
        return {"member": True, "profile": prof}
    ok = vals[-1] < ratio * vals[0] and all(b <= a * (1 + 1e-9) for a, b in zip(vals[-3:], vals[-2:]))
    return {"member": bool(ok), "profile": prof}


# Moebius action ----------------------------------------------------------------

def pullback(phi: QuadraticForm, gamma: MobiusMap) -> QuadraticForm:
    """gamma^* phi = phi(gamma) gamma'^2, written in the w chart:
    phi_w(w) -> phi_w(u) / (a + b w)^4 with u = 1 / gamma(1/w)."""
    f = phi.wfunc
    a, b = gamma.a, gamma.b

    def wf(w):
        w = np.asarray(w, dtype=complex)
        return f(gamma.apply_w(w)) / (a + b * w) ** 4

    return QuadraticForm(phi.spec, wf, f"pullback[{phi.name}]", phi.eps_min)


def invariance_residual(phi: QuadraticForm, sample) -> float:
    """max over generators of b_norm(gamma^* phi - phi)."""
    if not sample.generators:
        return 0.0
    return max(b_norm(pullback(phi, g) - phi) for g in sample.generators)
