"""Shared discretization and hyperbolic-geometry primitives.

Every sampled object in the package lives on a polar grid: uniform in angle
(FFT friendly) and graded in radius, with a geometric ladder of distances to
the unit circle used by all decay and distortion fits.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

R_MAX = 4.0


class DomainError(ValueError):
    """Point outside the domain of an operation."""


class ArgumentError(ValueError):
    """Invalid argument to a numerical routine."""


def _default_offsets(eps0=0.4, q=0.6, count=8):
    return tuple(float(eps0 * q**j) for j in range(count))


def _default_inner(offsets):
    near0 = [1e-3, 2e-3, 5e-3, 1e-2, 2e-2]
    bulk = np.linspace(0.03, 0.95, 185)
    # geometric toward the circle, down to 1 - 1e-4
    edge = 1.0 - 0.05 * 0.85 ** np.arange(0, 39)
    r = np.concatenate([near0, bulk, edge, 1.0 - np.asarray(offsets)])
    r = np.unique(np.round(r, 12))
    r = r[(r > 0) & (r < 1)]
    # drop near-duplicates that would make the product rules ill-conditioned
    keep = [r[0]]
    for x in r[1:]:
        if x - keep[-1] > 1e-3 * (1 - x) + 1e-9:
            keep.append(x)
    return tuple(float(x) for x in keep)


def _default_outer(offsets, r_max=R_MAX):
    ladder = 1.0 + np.asarray(offsets)
    bulk = np.linspace(1.5, r_max, 11)
    r = np.unique(np.concatenate([ladder, bulk, [1.05, 1.1, 1.2, 1.3]]))
    return tuple(float(x) for x in r if 1.0 < x <= r_max)


@dataclass(frozen=True)
class GridSpec:
    """Polar sampling of the disk and of the exterior disk.

    ``radii_inner`` are circles in the unit disk, ``radii_outer`` circles in
    the exterior disk (up to ``R_MAX``; farther points use the ``w = 1/z``
    chart), ``boundary_offsets`` the distances ``eps_j = eps0 * q**j`` used
    by decay fits.
    """

    n_theta: int = 256
    radii_inner: tuple = ()
    radii_outer: tuple = ()
    boundary_offsets: tuple = ()

    def __post_init__(self):
        offsets = tuple(self.boundary_offsets) or _default_offsets()
        object.__setattr__(self, "boundary_offsets", tuple(float(e) for e in offsets))
        if not self.radii_inner:
            object.__setattr__(self, "radii_inner", _default_inner(offsets))
        if not self.radii_outer:
            object.__setattr__(self, "radii_outer", _default_outer(offsets))
        object.__setattr__(self, "radii_inner", tuple(float(r) for r in self.radii_inner))
        object.__setattr__(self, "radii_outer", tuple(float(r) for r in self.radii_outer))
        self.validate()

    def validate(self):
        n = self.n_theta
        if n < 64 or n & (n - 1):
            raise ArgumentError(f"n_theta must be a power of two >= 64, got {n}")
        ri = np.asarray(self.radii_inner)
        if np.any(ri <= 0) or np.any(ri >= 1) or np.any(np.diff(ri) <= 0):
            raise ArgumentError("radii_inner must be strictly increasing in (0, 1)")
        ro = np.asarray(self.radii_outer)
        if np.any(ro <= 1) or np.any(np.diff(ro) <= 0):
            raise ArgumentError("radii_outer must be strictly increasing and > 1")
        eps = np.asarray(self.boundary_offsets)
        if len(eps) < 1 or np.any(eps <= 0) or np.any(np.diff(eps) >= 0):
            raise ArgumentError("boundary_offsets must be positive and strictly decreasing")

    @classmethod
    def coarse(cls, n_theta=64):
        """Small grid for quick experiments and randomized tests."""
        offsets = _default_offsets(count=6)
        inner = np.concatenate([[2e-3, 1e-2], np.linspace(0.03, 0.93, 46),
                                1.0 - 0.07 * 0.8 ** np.arange(0, 20), 1.0 - np.asarray(offsets)])
        inner = np.unique(np.round(inner, 12))
        return cls(n_theta=n_theta, radii_inner=tuple(inner), boundary_offsets=offsets)

    @property
    def theta(self):
        return 2 * np.pi * np.arange(self.n_theta) / self.n_theta

    def inner_points(self):
        return np.asarray(self.radii_inner)[:, None] * np.exp(1j * self.theta)[None, :]

    def outer_points(self):
        return np.asarray(self.radii_outer)[:, None] * np.exp(1j * self.theta)[None, :]

    def to_dict(self):
        return {
            "n_theta": self.n_theta,
            "radii_inner": list(self.radii_inner),
            "radii_outer": list(self.radii_outer),
            "boundary_offsets": list(self.boundary_offsets),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            n_theta=int(d["n_theta"]),
            radii_inner=tuple(d.get("radii_inner", ())),
            radii_outer=tuple(d.get("radii_outer", ())),
            boundary_offsets=tuple(d.get("boundary_offsets", ())),
        )

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def grid_hash(self):
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


CHARTS = ("disk", "exterior", "exterior-via-1/z")


@dataclass(frozen=True)
class ComplexGridFunction:
    """Complex samples indexed by (circle, angle) in one chart."""

    spec: GridSpec
    values: np.ndarray
    chart: str = "disk"
    radii: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.chart not in CHARTS:
            raise ArgumentError(f"unknown chart {self.chart!r}")
        vals = np.asarray(self.values, dtype=complex)
        if self.radii is None:
            radii = self.spec.radii_inner if self.chart == "disk" else self.spec.radii_outer
            object.__setattr__(self, "radii", np.asarray(radii, dtype=float))
        else:
            object.__setattr__(self, "radii", np.asarray(self.radii, dtype=float))
        if vals.shape != (len(self.radii), self.spec.n_theta):
            raise ArgumentError(
                f"values shape {vals.shape} != ({len(self.radii)}, {self.spec.n_theta})")
        if not np.all(np.isfinite(vals)):
            raise ArgumentError("non-finite sample")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def points(self):
        return self.radii[:, None] * np.exp(1j * self.spec.theta)[None, :]

    def to_csv(self, path):
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["circle_index", "angle_index", "re", "im"])
            for i, row in enumerate(self.values):
                for j, v in enumerate(row):
                    w.writerow([i, j, repr(float(v.real)), repr(float(v.imag))])

    @classmethod
    def from_csv(cls, path, spec, chart="disk", radii=None):
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        data = np.atleast_2d(data)
        n_circ = int(data[:, 0].max()) + 1
        vals = np.zeros((n_circ, spec.n_theta), dtype=complex)
        vals[data[:, 0].astype(int), data[:, 1].astype(int)] = data[:, 2] + 1j * data[:, 3]
        return cls(spec, vals, chart, radii)


def hyperbolic_density_disk(z):
    """rho(z) = 2 / (1 - |z|^2) on the unit disk."""
    a = np.abs(np.asarray(z))
    if np.any(a >= 1):
        raise DomainError("hyperbolic_density_disk needs |z| < 1")
    out = 2.0 / (1.0 - a * a)
    return float(out) if np.ndim(out) == 0 else out


def hyperbolic_density_exterior(z):
    """rho(z) = 2 / (|z|^2 - 1) on the exterior disk."""
    a = np.abs(np.asarray(z))
    if np.any(a <= 1):
        raise DomainError("hyperbolic_density_exterior needs |z| > 1")
    # (|z|-1)(|z|+1) keeps precision for |z| close to 1
    out = 2.0 / ((a - 1.0) * (a + 1.0))
    return float(out) if np.ndim(out) == 0 else out


def reflect(z):
    """Reflection in the unit circle, z -> 1 / conj(z)."""
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise DomainError("reflect(0) is infinity")
    out = 1.0 / np.conj(z)
    return complex(out) if out.ndim == 0 else out


def log_log_slope_fit(pairs):
    """Least-squares slope of log(value) against log(scale).

    Returns ``(slope, r_squared)``.
    """
    arr = np.asarray(list(pairs), dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 4 or arr.shape[1] != 2:
        raise ArgumentError("need at least 4 (scale, value) pairs")
    if np.any(arr <= 0) or not np.all(np.isfinite(arr)):
        raise ArgumentError("scales and values must be positive and finite")
    x, y = np.log(arr[:, 0]), np.log(arr[:, 1])
    slope, icpt = np.polyfit(x, y, 1)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum((y - (slope * x + icpt)) ** 2))
    r2 = 1.0 if ss_tot <= 1e-30 else max(0.0, 1.0 - ss_res / ss_tot)
    return float(slope), float(r2)


def dyadic_oscillation(values, step, periodic=True):
    """Max |v(x + s) - v(x)| at dyadic lags s = step * 2**k.

    Returns lists ``(lags, oscillations)`` ordered from finest to coarsest.
    """
    v = np.asarray(values)
    n = len(v)
    lags, osc = [], []
    k = 1
    while k <= n // 4:
        if periodic:
            d = np.abs(np.roll(v, -k) - v)
        else:
            d = np.abs(v[k:] - v[:-k])
        lags.append(k * step)
        osc.append(float(d.max()))
        k *= 2
    return lags, osc


def holder_ladder(values, step, alphas=None, periodic=True):
    """Hoelder quotients of sampled data at several exponents.

    For each alpha the constant is ``max_s osc(s) / s**alpha`` over dyadic
    lags.  The finest-scale growth decides boundedness: a quotient that is
    still rising at the two finest lags is reported as unbounded.  Also
    returns the exponent estimated from the finest lags.
    """
    if alphas is None:
        alphas = [round(0.1 * i, 1) for i in range(1, 10)]
    lags, osc = dyadic_oscillation(values, step, periodic)
    lags, osc = np.asarray(lags), np.asarray(osc)
    tiny = 1e-13 * max(1.0, float(np.max(np.abs(values))))
    if np.all(osc <= tiny):
        return {a: 0.0 for a in alphas}, {a: True for a in alphas}, float("inf")
    # lag-1 differences cannot straddle a sample symmetrically, so at a cusp
    # sitting on a node the finest oscillation is low by up to 2^alpha
    j0 = 1 if len(lags) >= 6 else 0
    m = min(j0 + 4, len(lags))
    good = osc[j0:m] > tiny
    if good.sum() >= 2:
        est = float(np.polyfit(np.log(lags[j0:m][good]), np.log(osc[j0:m][good]), 1)[0])
    else:
        est = float("inf")
    consts, bounded = {}, {}
    for a in alphas:
        quot = osc / lags**a
        consts[a] = float(quot.max())
        bounded[a] = bool(a <= est + 0.05)
    return consts, bounded, est


def polar_trapezoid_weights(radii, r_outer=None):
    """Area weights (per radius, to be multiplied by 2*pi/n_theta) for the polar grid.

    Trapezoid rule in ``t = -log(1 - r)`` on ``[0, r_last]``, which resolves the
    geometric clustering at the circle; the segment ``[0, r_0]`` is added with
    the integrand taken as linear in r (it vanishes at the center as r).
    """
    r = np.asarray(radii, dtype=float)
    t = -np.log1p(-r)
    wt = np.zeros_like(r)
    dt = np.diff(t)
    wt[:-1] += dt / 2
    wt[1:] += dt / 2
    # dr = (1 - r) dt, area element r dr
    w = wt * (1 - r) * r
    w[0] += r[0] * r[0] / 2
    return w


class PolarInterpolator:
    """Off-grid evaluation of polar samples: trigonometric in angle, cubic
    spline of each angular mode in radius.

    ``values`` has shape (len(radii), n_theta).  A node at the origin is
    added (only the mean survives there).  Modes that are zero to rounding
    are dropped to keep evaluation cheap.
    """

    def __init__(self, radii, values, add_origin=True):
        from scipy.interpolate import CubicSpline

        r = np.asarray(radii, dtype=float)
        v = np.asarray(values, dtype=complex)
        n = v.shape[1]
        modes = np.fft.fft(v, axis=1) / n
        if add_origin and r[0] > 0:
            origin = np.zeros((1, n), dtype=complex)
            origin[0, 0] = modes[0, 0]
            r = np.concatenate([[0.0], r])
            modes = np.vstack([origin, modes])
        k = np.fft.fftfreq(n, 1.0 / n).astype(int)
        amp = np.abs(modes).max(axis=0)
        keep = amp > 1e-15 * max(amp.max(), 1e-300)
        keep[0] = True
        self.k = k[keep]
        self.r_min, self.r_max = r[0], r[-1]
        self._spline = CubicSpline(r, modes[:, keep], axis=0)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        shape = z.shape
        z = z.ravel()
        out = np.empty(len(z), dtype=complex)
        kmax = int(np.abs(self.k).max())
        for i in range(0, len(z), 4096):
            zc = z[i:i + 4096]
            m = self._spline(np.clip(np.abs(zc), self.r_min, self.r_max))
            if kmax == 0:
                out[i:i + 4096] = m[:, 0]
                continue
            # e^{ik theta} by repeated products (much cheaper than exp)
            u = np.exp(1j * np.angle(zc))
            pw = np.empty((len(zc), kmax + 1), dtype=complex)
            pw[:, 0] = 1.0
            pw[:, 1:] = np.cumprod(np.broadcast_to(u[:, None], (len(zc), kmax)), axis=1)
            e = pw[:, np.abs(self.k)]
            neg = self.k < 0
            e[:, neg] = np.conj(e[:, neg])
            out[i:i + 4096] = np.sum(m * e, axis=1)
        return out.reshape(shape)
