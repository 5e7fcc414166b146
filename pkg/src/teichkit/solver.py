"""Measurable Riemann mapping solver.

Two problems are solved on the polar grid:

* ``solve_bers``: mu supported on the closed disk (zero outside).  With
  ``F = z + C h`` and ``h = dF/dzbar`` the Beltrami equation becomes
  ``h = mu (1 + T h)``, solved by Neumann iteration.  Outside the disk F is
  the Laurent series ``z + sum_k a_k z^(-k-1)``.
* ``solve_disk``: nu on the disk, extended to the plane by reflection so that
  the solution preserves the disk.  Writing ``F = z exp(phi)`` the unknown is
  ``w = z dphi/dzbar``, with ``w = nu (1 + z dphi/dz)``; the reflection
  symmetry ``phi(z) = -conj(phi(1/conj z))`` fixes the free constants of
  each angular mode, so only disk samples are needed.  The result is
  post-composed with the disk automorphism fixing 1, i, -1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from . import config
from ._transforms import (beurling_modes, cauchy_modes, from_modes, inner_integral,
                          mode_numbers, outer_integral, shift_modes, to_modes)
from .beltrami import BeltramiField
from .circle import CircleMap
from .grid import ComplexGridFunction, DomainError, PolarInterpolator
from .mobius import MobiusMap, three_point_map


class SolverError(RuntimeError):
    def __init__(self, msg, last_increment=None):
        super().__init__(msg)
        self.last_increment = last_increment


class BudgetError(SolverError):
    pass


class ChartError(DomainError):
    pass


class InversionError(RuntimeError):
    def __init__(self, msg, failures=None):
        super().__init__(msg)
        self.failures = failures


def _fd_dbar_residual(F, radii, mu, r_lo=0.05, r_hi=0.97):
    """max |F_zbar - mu F_z| from finite differences of the sampled map
    (4th order in angle, 2nd order in radius), relative to |F_z|."""
    r = np.asarray(radii)
    n = F.shape[1]
    dt = 2 * np.pi / n
    Ft = (8 * (np.roll(F, -1, 1) - np.roll(F, 1, 1)) - (np.roll(F, -2, 1) - np.roll(F, 2, 1))) / (12 * dt)
    Fr = np.gradient(F, r, axis=0, edge_order=2)
    e = np.exp(1j * 2 * np.pi * np.arange(n) / n)[None, :]
    rr = r[:, None]
    fzb = 0.5 * e * (Fr + 1j * Ft / rr)
    fz = 0.5 / e * (Fr - 1j * Ft / rr)
    sel = (r > r_lo) & (r < r_hi)
    sel[[0, -1]] = False
    res = np.abs(fzb - mu * fz)[sel] / np.maximum(np.abs(fz[sel]), 1e-300)
    return float(res.max()) if res.size else 0.0


@dataclass(frozen=True)
class SolvedMap:
    """A solved quasiconformal map with forward and inverse evaluation."""

    kind: str
    source: BeltramiField
    values: np.ndarray       # forward samples on the inner grid
    dz_values: np.ndarray
    dzbar_values: np.ndarray
    boundary_values: np.ndarray  # samples on |z| = 1
    laurent: Optional[np.ndarray] = None   # a_k (kind bers)
    mobius: Optional[MobiusMap] = None     # normalization (kind disk_self_map)
    dbar_residual: float = 0.0
    neumann_terms: int = 0
    increments: tuple = ()
    boundary_map: Optional[CircleMap] = field(default=None, repr=False)

    @property
    def spec(self):
        return self.source.spec

    @property
    def contraction_ratios(self):
        inc = np.asarray(self.increments)
        inc = inc[inc > 1e-14]
        return inc[1:] / inc[:-1] if len(inc) > 1 else np.array([])

    def _interp(self, name):
        cache = self.__dict__.setdefault("_cache", {})
        if name not in cache:
            r = np.asarray(self.spec.radii_inner)
            if name == "values":
                cache[name] = PolarInterpolator(np.append(r, 1.0),
                                                np.vstack([self.values, self.boundary_values]))
            else:
                cache[name] = PolarInterpolator(r, getattr(self, name))
        return cache[name]

    def _check_chart(self, z):
        if self.kind == "disk_self_map" and np.any(np.abs(z) > 1 + 1e-12):
            raise ChartError("disk self-map is only evaluated on the closed disk")

    def _inside(self, z):
        if self.kind == "disk_self_map":
            return np.ones(z.shape, dtype=bool)
        return np.abs(z) <= 1.0

    def _laurent_eval(self, z, deriv=False):
        u = 1.0 / z
        a = self.laurent
        if deriv:
            k = np.arange(len(a))
            return 1.0 - u * u * np.polyval(((k + 1) * a)[::-1], u)
        return z + u * np.polyval(a[::-1], u)

    def evaluate(self, z):
        z = np.asarray(z, dtype=complex)
        self._check_chart(z)
        inside = self._inside(z)
        out = np.empty(z.shape, dtype=complex)
        out[inside] = self._interp("values")(z[inside])
        if self.kind == "bers" and np.any(~inside):
            out[~inside] = self._laurent_eval(z[~inside])
        return out

    def dz(self, z):
        z = np.asarray(z, dtype=complex)
        self._check_chart(z)
        inside = self._inside(z)
        out = np.empty(z.shape, dtype=complex)
        out[inside] = self._interp("dz_values")(z[inside])
        if self.kind == "bers" and np.any(~inside):
            out[~inside] = self._laurent_eval(z[~inside], deriv=True)
        return out

    def dzbar(self, z):
        z = np.asarray(z, dtype=complex)
        self._check_chart(z)
        inside = self._inside(z)
        out = np.zeros(z.shape, dtype=complex)
        out[inside] = self._interp("dzbar_values")(z[inside])
        return out

    def forward_samples(self):
        """Forward values as grid functions: (disk chart, exterior chart or None)."""
        inner = ComplexGridFunction(self.spec, self.values, "disk")
        zo = self.spec.outer_points()
        if self.kind == "bers":
            outer = ComplexGridFunction(self.spec, self._laurent_eval(zo), "exterior")
        else:
            # reflection symmetry of the disk self-map
            outer = ComplexGridFunction(self.spec, 1.0 / np.conj(self.evaluate(1.0 / np.conj(zo))),
                                        "exterior")
        return inner, outer

    def _seed_tree(self):
        cache = self.__dict__.setdefault("_cache", {})
        if "tree" not in cache:
            pts = [self.spec.inner_points().ravel()]
            vals = [self.values.ravel()]
            th = self.spec.theta
            pts.append(np.exp(1j * th))
            vals.append(self.boundary_values)
            if self.kind == "bers":
                zo = self.spec.outer_points().ravel()
                pts.append(zo)
                vals.append(self._laurent_eval(zo))
            pts, vals = np.concatenate(pts), np.concatenate(vals)
            cache["tree"] = (cKDTree(np.c_[vals.real, vals.imag]), pts)
        return cache["tree"]

    def grid_preimages(self):
        """f^-1 of the source grid points and f_z there (cached)."""
        cache = self.__dict__.setdefault("_cache", {})
        if "preimages" not in cache:
            z = self.inverse_evaluate(self.spec.inner_points())
            cache["preimages"] = (z, self.dz(z))
        return cache["preimages"]

    def inverse_evaluate(self, w, tol=None, max_iter=None):
        """Solve f(z) = w by damped Newton seeded at the nearest grid preimage."""
        tol = config.get("newton_tol") if tol is None else tol
        max_iter = config.get("newton_max_iter") if max_iter is None else max_iter
        w = np.asarray(w, dtype=complex)
        shape = w.shape
        w = w.ravel()
        if self.kind == "disk_self_map" and np.any(np.abs(w) > 1 + 1e-12):
            raise ChartError("target outside the image of the disk self-map")
        tree, pts = self._seed_tree()
        _, idx = tree.query(np.c_[w.real, w.imag])
        z = pts[idx].copy()
        scale = np.maximum(1.0, np.abs(w))
        res = self.evaluate(z) - w
        for _ in range(max_iter):
            err = np.abs(res)
            act = err > tol * scale
            if not act.any():
                break
            za = z[act]
            p, q = self.dz(za), self.dzbar(za)
            r_ = res[act]
            det = np.abs(p) ** 2 - np.abs(q) ** 2
            step = (np.conj(p) * r_ - q * np.conj(r_)) / det
            lam = np.ones(len(za))
            new = za - step
            if self.kind == "disk_self_map":
                new = np.where(np.abs(new) > 1, new / np.abs(new), new)
            nres = self.evaluate(new) - w[act]
            # halve the step where the residual did not drop
            for _ in range(20):
                bad = np.abs(nres) > np.abs(r_) * (1 - 1e-4 * lam)
                bad &= np.abs(r_) > tol * scale[act]
                if not bad.any():
                    break
                lam = np.where(bad, lam / 2, lam)
                new = np.where(bad, za - lam * step, new)
                if self.kind == "disk_self_map":
                    new = np.where(np.abs(new) > 1, new / np.abs(new), new)
                nres[bad] = self.evaluate(new[bad]) - w[act][bad]
            z[act] = new
            res[act] = nres
        err = np.abs(res)
        fail = err > 1e3 * tol * scale
        if fail.any():
            raise InversionError(f"Newton failed at {int(fail.sum())} points (max residual {err.max():.2e})",
                                 failures={"w": w[fail], "residual": err[fail]})
        return z.reshape(shape)

    # persistence
    def metadata(self):
        return {"kind": self.kind, "dbar_residual": self.dbar_residual,
                "neumann_terms": self.neumann_terms,
                "source_grid_hash": self.spec.grid_hash(),
                "source": self.source.name,
                "mobius": self.mobius.to_dict() if self.mobius is not None else None}

    def save(self, out_dir, stem="map"):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        inner, outer = self.forward_samples()
        inner.to_csv(out / f"{stem}_inner.csv")
        outer.to_csv(out / f"{stem}_outer.csv")
        (out / f"{stem}.json").write_text(json.dumps(self.metadata(), sort_keys=True, indent=1))


def _check_budget(mu):
    budget = config.get("solver_budget")
    if mu.sup_bound > budget:
        raise BudgetError(f"sup |mu| = {mu.sup_bound:.4f} exceeds solver budget {budget}")


def _iterate(update, start, tol, max_iter):
    x = start
    incs = []
    for it in range(1, max_iter + 1):
        new, aux = update(x)
        inc = float(np.max(np.abs(new - x)))
        incs.append(inc)
        x = new
        if inc < tol:
            return x, aux, it, incs
    raise SolverError(f"Neumann series did not converge in {max_iter} iterations", incs[-1])


def solve_bers(mu: BeltramiField, tol=None, max_iter=None) -> SolvedMap:
    """f with dbar f = mu df on the disk and f conformal outside, f = z + O(1/z)."""
    _check_budget(mu)
    tol = config.get("solver_tol") if tol is None else tol
    max_iter = config.get("solver_max_iter") if max_iter is None else max_iter
    spec = mu.spec
    r = np.asarray(spec.radii_inner)
    m = np.asarray(mu.values)

    def update(h):
        th = from_modes(beurling_modes(to_modes(h), r))
        return m * (1.0 + th), th

    if not np.any(m):
        h, th, nit, incs = np.zeros_like(m), np.zeros_like(m), 0, []
    else:
        h, _, nit, incs = _iterate(update, m.copy(), tol, max_iter)
        th = from_modes(beurling_modes(to_modes(h), r))
    c, c_one = cauchy_modes(to_modes(h), r)
    z = spec.inner_points()
    F = z + from_modes(c)
    n = mode_numbers(spec.n_theta)
    neg = n <= -1
    laurent = np.zeros(spec.n_theta // 2, dtype=complex)
    laurent[-n[neg] - 1] = c_one[neg]
    boundary = np.exp(1j * spec.theta) + from_modes(c_one)
    res = _fd_dbar_residual(F, r, m)
    return SolvedMap("bers", mu, F, 1.0 + th, h, boundary, laurent=laurent,
                     dbar_residual=res, neumann_terms=nit, increments=tuple(incs))


def _phi_modes(wm, r):
    """Modes of phi (on the nodes and on |z| = 1) and of z dphi/dz from w."""
    n_theta = wm.shape[1]
    n = mode_numbers(n_theta)
    neg, zero, pos = n <= -1, n == 0, n >= 1
    ws = shift_modes(wm, 2)  # column n: w_{n+2}
    inn, inn1 = inner_integral(ws, np.where(neg, np.abs(n), 1.0), r, (n + 2) != 0, at_one=True)
    out = outer_integral(ws, np.where(n >= 0, n, 0.0), r)
    # E_n = int_0^1 s^(n-1) conj(w_{2-n}(s)) ds for n >= 1
    src = 2 - n
    ok = (src >= -(n_theta // 2)) & (src < n_theta // 2)
    g2 = np.zeros_like(wm)
    g2[:, ok] = np.conj(wm[:, src[ok] % n_theta])
    _, E = inner_integral(g2, np.where(pos, n, 1.0), r, src != 0, at_one=True)
    rr = np.asarray(r)[:, None]
    c = np.zeros_like(wm)
    c[:, neg] = 2.0 * inn[:, neg]
    c[:, zero] = -2.0 * out[:, zero]
    c[:, pos] = -2.0 * (out[:, pos] + rr ** n[pos] * E[pos])
    c1 = np.zeros(n_theta, dtype=complex)
    c1[neg] = 2.0 * inn1[neg]
    c1[pos] = -2.0 * E[pos]
    zp = n * c + ws
    return c, c1, zp


def solve_disk(nu: BeltramiField, tol=None, max_iter=None) -> SolvedMap:
    """Normalized quasiconformal self-map of the disk with dilatation nu,
    fixing 1, i and -1."""
    _check_budget(nu)
    tol = config.get("solver_tol") if tol is None else tol
    max_iter = config.get("solver_max_iter") if max_iter is None else max_iter
    spec = nu.spec
    if spec.n_theta % 4:
        raise ValueError("n_theta must be divisible by 4")
    r = np.asarray(spec.radii_inner)
    v = np.asarray(nu.values)

    def update(w):
        _, _, zpm = _phi_modes(to_modes(w), r)
        zp = from_modes(zpm)
        return v * (1.0 + zp), zp

    if not np.any(v):
        w, nit, incs = np.zeros_like(v), 0, []
    else:
        w, _, nit, incs = _iterate(update, v.copy(), tol, max_iter)
    c, c1, zpm = _phi_modes(to_modes(w), r)
    phi, zp = from_modes(c), from_modes(zpm)
    z = spec.inner_points()
    e = np.exp(phi)
    F0 = z * e
    F0z, F0zb = e * (1.0 + zp), e * w
    th = spec.theta
    phi1 = from_modes(c1)
    lift0 = th + phi1.imag
    b0 = np.exp(1j * lift0)
    N = spec.n_theta
    imgs = b0[[0, N // 4, N // 2]]
    M = MobiusMap.from_matrix(three_point_map(imgs, np.array([1.0, 1j, -1.0])))
    d = M.derivative(F0)
    F = M(F0)
    boundary = M(b0)
    fixed = np.abs(boundary[[0, N // 4, N // 2]] - np.array([1.0, 1j, -1.0]))
    if fixed.max() > 1e-9:
        raise SolverError(f"normalization failed (max deviation {fixed.max():.2e})")
    # derivative of the boundary lift, spectrally
    k = mode_numbers(N)
    dlift0 = 1.0 + np.real(from_modes(1j * k * to_modes(phi1.imag)))
    lift = M.boundary_angle(lift0)
    circ = CircleMap(lift, M.boundary_derivative(lift0) * dlift0)
    res = _fd_dbar_residual(F, r, v)
    out = SolvedMap("disk_self_map", nu, F, d * F0z, d * F0zb, boundary, mobius=M,
                    dbar_residual=res, neumann_terms=nit, increments=tuple(incs),
                    boundary_map=circ)
    object.__setattr__(out, "_modulus_defect", float(np.max(np.abs(phi1.real))))
    return out
