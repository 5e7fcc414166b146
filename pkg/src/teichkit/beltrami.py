"""Beltrami coefficients on the unit disk: norms, products, right translations."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import config
from .grid import (ArgumentError, ComplexGridFunction, GridSpec, PolarInterpolator,
                   hyperbolic_density_disk, log_log_slope_fit, polar_trapezoid_weights)


class ConsistencyError(ValueError):
    """A solved map was passed together with a field it was not solved from."""


@dataclass(frozen=True)
class BeltramiField:
    """Complex dilatation sampled on the disk grid, with an optional exact callable."""

    samples: ComplexGridFunction
    func: Optional[Callable] = field(default=None, compare=False, repr=False)
    name: str = ""

    def __post_init__(self):
        if self.samples.chart != "disk":
            raise ArgumentError("Beltrami fields live on the disk chart")
        if self.sup_bound >= 1.0:
            raise ArgumentError(f"sup |mu| = {self.sup_bound:.6g} >= 1")

    @property
    def spec(self) -> GridSpec:
        return self.samples.spec

    @property
    def values(self):
        return self.samples.values

    @property
    def sup_bound(self) -> float:
        return float(np.max(np.abs(self.samples.values))) if self.samples.values.size else 0.0

    # constructors
    @classmethod
    def from_callable(cls, func, spec=None, name=""):
        spec = spec or GridSpec()
        z = spec.inner_points()
        vals = np.broadcast_to(np.asarray(func(z), dtype=complex), z.shape)
        return cls(ComplexGridFunction(spec, vals.copy(), "disk"), func, name)

    @classmethod
    def from_values(cls, values, spec, name=""):
        return cls(ComplexGridFunction(spec, values, "disk"), None, name)

    @classmethod
    def zero(cls, spec=None):
        return cls.from_callable(lambda z: np.zeros_like(np.asarray(z, dtype=complex)), spec, "zero")

    @classmethod
    def constant(cls, k, spec=None):
        k = complex(k)
        return cls.from_callable(lambda z: np.full(np.shape(z), k, dtype=complex), spec, f"constant({k.real:g})")

    @classmethod
    def radial_stretch(cls, K, spec=None):
        """Dilatation of z |z|^(K-1): ((K-1)/(K+1)) z / conj(z)."""
        k = (K - 1.0) / (K + 1.0)

        def f(z):
            z = np.asarray(z, dtype=complex)
            with np.errstate(invalid="ignore", divide="ignore"):
                out = k * z / np.conj(z)
            return np.where(z == 0, k, out)

        return cls.from_callable(f, spec, f"radial_stretch({K:g})")

    def __call__(self, z):
        if self.func is not None:
            z = np.asarray(z, dtype=complex)
            return np.broadcast_to(np.asarray(self.func(z), dtype=complex), z.shape).copy()
        interp = self.__dict__.get("_interp")
        if interp is None:
            interp = PolarInterpolator(self.spec.radii_inner, self.values)
            object.__setattr__(self, "_interp", interp)
        return interp(z)

    def restrict(self, mask_func, name=None):
        """Field multiplied by the indicator ``mask_func(z)``."""
        base = self

        def f(z):
            z = np.asarray(z, dtype=complex)
            return np.where(mask_func(z), base(z), 0.0)

        vals = np.where(mask_func(self.samples.points()), self.values, 0.0)
        return BeltramiField(ComplexGridFunction(self.spec, vals, "disk"), f, name or self.name)

    def to_csv(self, path):
        path = Path(path)
        self.samples.to_csv(path)
        meta = {"sup_bound": self.sup_bound, "grid_hash": self.spec.grid_hash(), "name": self.name}
        path.with_suffix(".json").write_text(json.dumps(meta, sort_keys=True, indent=1))

    @classmethod
    def from_csv(cls, path, spec):
        return cls(ComplexGridFunction.from_csv(path, spec, "disk"))


def sup_norm(mu: BeltramiField) -> float:
    return mu.sup_bound


def maximal_dilatation(mu) -> float:
    k = mu.sup_bound if isinstance(mu, BeltramiField) else float(mu)
    return (1.0 + k) / (1.0 - k)


def _shell_sums(radii, integrand, shell_dt=1.0):
    """Integrals of an angle-averaged radial density over shells of unit
    width in t = -log(1 - r).  Returns (total, shell list)."""
    w = polar_trapezoid_weights(radii) * 2 * np.pi
    t = -np.log1p(-np.asarray(radii))
    contrib = w * integrand
    edges = np.arange(0.0, t[-1] + shell_dt, shell_dt)
    idx = np.clip(np.searchsorted(edges, t, side="right") - 1, 0, len(edges) - 1)
    shells = np.bincount(idx, weights=contrib, minlength=len(edges))
    # the last shell is usually partial; drop it from the criterion
    full = shells[:-1] if len(shells) > 4 and t[-1] < edges[-1] - 0.5 * shell_dt else shells
    return float(contrib.sum()), full


def _tail_verdict(shells, ratio_max):
    """Cauchy-type test on the last three shells.  Returns (finite, tail)."""
    s = np.asarray(shells[-3:], dtype=float)
    if len(s) < 3:
        return False, float("inf")
    if np.all(s <= 1e-300):
        return True, 0.0
    q = s[1:] / np.maximum(s[:-1], 1e-300)
    if np.all(q <= ratio_max):
        qq = float(q[-1])
        return True, float(s[-1] * qq / (1 - qq))
    return False, float("inf")


def p_norm_report(mu: BeltramiField, p: float, ratio_max=None):
    """Quadrature of |mu|^p rho^2 over the disk with a divergence verdict."""
    if p < 1:
        raise ArgumentError("p must be >= 1")
    ratio_max = config.get("shell_ratio_max") if ratio_max is None else ratio_max
    r = np.asarray(mu.spec.radii_inner)
    dens = hyperbolic_density_disk(r) ** 2
    radial = np.mean(np.abs(mu.values) ** p, axis=1) * dens
    if np.all(radial == 0):
        return {"value": 0.0, "finite": True, "integral": 0.0, "tail": 0.0, "shells": []}
    total, shells = _shell_sums(r, radial)
    finite, tail = _tail_verdict(shells, ratio_max)
    val = (total + tail) ** (1.0 / p) if finite else float("inf")
    return {"value": val, "finite": finite, "integral": total + tail if finite else float("inf"),
            "tail": tail, "shells": [float(x) for x in shells]}


def p_norm(mu: BeltramiField, p: float) -> float:
    """||mu||_p = (int |mu|^p rho_D^2 dxdy)^(1/p); +inf when judged divergent."""
    return p_norm_report(mu, p)["value"]


def boundary_profile(values, spec, weight_exp=0.0):
    """(eps_j, max rho^weight_exp |v| on the circle r = 1 - eps_j) over the ladder."""
    r = np.asarray(spec.radii_inner)
    out = []
    for eps in spec.boundary_offsets:
        i = int(np.argmin(np.abs(r - (1 - eps))))
        w = hyperbolic_density_disk(r[i]) ** weight_exp if weight_exp else 1.0
        out.append((float(1 - r[i]), float(w * np.max(np.abs(values[i])))))
    return out


def holder_weighted_report(mu: BeltramiField, alpha: float, slope_min=None):
    if not 0 < alpha < 1:
        raise ArgumentError("alpha must lie in (0, 1)")
    slope_min = config.get("growth_slope") if slope_min is None else slope_min
    r = np.asarray(mu.spec.radii_inner)
    w = hyperbolic_density_disk(r) ** alpha
    weighted = w[:, None] * np.abs(mu.values)
    val = float(weighted.max())
    prof = boundary_profile(mu.values, mu.spec, alpha)
    tail = [pr for pr in prof[-4:] if pr[1] > 0]
    finite = True
    slope = None
    if len(tail) == 4:
        slope, _ = log_log_slope_fit(tail)
        # values rising toward the circle as eps^(-s) with s above the margin;
        # a profile converging to a finite limit has local slopes shrinking
        # geometrically instead of settling at -s
        e = np.log([pr[0] for pr in tail])
        v = np.log([pr[1] for pr in tail])
        loc = np.diff(v) / np.diff(e)
        shrinking = bool(np.all(np.abs(loc[1:]) <= 0.8 * np.abs(loc[:-1])))
        finite = slope > -slope_min or loc[-1] > -slope_min or shrinking
    return {"value": val if finite else float("inf"), "finite": finite,
            "grid_max": val, "slope": slope, "profile": prof}


def holder_weighted_norm(mu: BeltramiField, alpha: float) -> float:
    """sup rho_D^alpha |mu|; +inf when the boundary profile keeps growing."""
    return holder_weighted_report(mu, alpha)["value"]


def in_bel0(mu: BeltramiField, threshold=None):
    """Grid proxy for vanishing at the boundary: small and decreasing on the
    three outermost circles."""
    threshold = config.get("bel0_threshold") if threshold is None else threshold
    m = np.max(np.abs(mu.values[-3:]), axis=1)
    # below the decay floor the circles carry only rounding noise
    flat = m[0] <= config.get("decay_floor") * 1e3
    ok = bool(m[-1] < threshold and (flat or m[2] <= m[1] <= m[0]))
    return {"member": ok, "outer_maxima": [float(x) for x in m], "threshold": threshold}


def decay_exponent_field(mu: BeltramiField):
    """Exponent a in |mu| ~ eps^a near the circle (fit over the ladder)."""
    prof = [p for p in boundary_profile(mu.values, mu.spec) if p[1] > 0]
    if len(prof) < 4:
        return float("inf"), 1.0
    return log_log_slope_fit(prof)


# group operations -----------------------------------------------------------

def _check_source(nu, f):
    src = f.source
    if src is nu:
        return
    if src.spec != nu.spec or not np.allclose(src.values, nu.values, atol=1e-12, rtol=0):
        raise ConsistencyError("solved map was not solved from this field")


def product(mu: BeltramiField, nu: BeltramiField, f_nu, name="") -> BeltramiField:
    """mu * nu: dilatation of f^mu o f^nu on the grid (chain rule, no inversion)."""
    _check_source(nu, f_nu)
    z = nu.samples.points()
    fz = f_nu.dz(z)
    tau = np.conj(fz) / fz
    m = mu(f_nu.evaluate(z))
    v = nu.values
    vals = (v + m * tau) / (1 + np.conj(v) * m * tau)
    return BeltramiField.from_values(vals, nu.spec, name)


def right_translate(mu: BeltramiField, nu: BeltramiField, f_nu, name="") -> BeltramiField:
    """r_nu(mu) = mu * nu^{-1}, sampled at grid points zeta = f^nu(z)."""
    _check_source(nu, f_nu)
    z, fz = f_nu.grid_preimages()
    m, v = mu(z), nu(z)
    vals = (m - v) / (1 - np.conj(v) * m) * fz / np.conj(fz)
    return BeltramiField.from_values(vals, nu.spec, name)


def compose(nu1: BeltramiField, nu2: BeltramiField, f_nu2, name="") -> BeltramiField:
    """nu1 * nu2^{-1} through the solved map of nu2 (same as right translation)."""
    return right_translate(nu1, nu2, f_nu2, name)


def split_tail(mu: BeltramiField, r0: float, solve=None):
    """mu = core * tail with tail = mu restricted to |z| > r0.

    Returns ``(tail, core, f_tail)``; ``solve`` defaults to the disk solver.
    """
    r = mu.spec.radii_inner
    if not r[0] < r0 < r[-1]:
        raise ArgumentError("r0 outside the radial range of the grid")
    if solve is None:
        from .solver import solve_disk as solve
    tail = mu.restrict(lambda z: np.abs(z) > r0, name=f"{mu.name}|tail")
    f_tail = solve(tail)
    core = right_translate(mu, tail, f_tail, name=f"{mu.name}|core")
    return tail, core, f_tail
