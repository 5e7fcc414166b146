"""Orientation-preserving circle homeomorphisms stored through their lifts."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .grid import ArgumentError

TWO_PI = 2.0 * np.pi


class MonotonicityError(ValueError):
    pass


@dataclass(frozen=True)
class CircleMap:
    """Lift G of a circle map, G(t + 2pi) = G(t) + 2pi, sampled at t_j = 2 pi j / n.

    ``func`` / ``dfunc`` (optional) evaluate the lift and its derivative
    exactly; otherwise a periodic cubic spline of the displacement
    ``G(t) - t`` is used.
    """

    lift_samples: np.ndarray
    deriv_samples: Optional[np.ndarray] = None
    func: Optional[Callable] = field(default=None, compare=False, repr=False)
    dfunc: Optional[Callable] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        g = np.asarray(self.lift_samples, dtype=float)
        if g.ndim != 1 or len(g) < 8:
            raise ArgumentError("need at least 8 lift samples")
        g.setflags(write=False)
        object.__setattr__(self, "lift_samples", g)
        t = self.theta
        disp = np.append(g - t, g[0])
        spline = CubicSpline(np.append(t, TWO_PI), disp, bc_type="periodic")
        object.__setattr__(self, "_spline", spline)
        if self.deriv_samples is None:
            d = self.dfunc(t) if self.dfunc is not None else 1.0 + spline(t, 1)
            object.__setattr__(self, "deriv_samples", np.asarray(d, dtype=float))
        else:
            object.__setattr__(self, "deriv_samples", np.asarray(self.deriv_samples, dtype=float))

    @property
    def n(self):
        return len(self.lift_samples)

    @property
    def theta(self):
        return TWO_PI * np.arange(self.n) / self.n

    # constructors
    @classmethod
    def from_lift(cls, func, dfunc=None, n=512):
        t = TWO_PI * np.arange(n) / n
        d = None if dfunc is None else dfunc(t)
        return cls(func(t), d, func, dfunc)

    @classmethod
    def identity(cls, n=512):
        return cls.from_lift(lambda t: np.asarray(t, dtype=float),
                             lambda t: np.ones_like(np.asarray(t, dtype=float)), n)

    @classmethod
    def rotation(cls, angle, n=512):
        return cls.from_lift(lambda t: np.asarray(t, dtype=float) + angle,
                             lambda t: np.ones_like(np.asarray(t, dtype=float)), n)

    @classmethod
    def from_mobius(cls, m, n=512):
        return cls.from_lift(m.boundary_angle, m.boundary_derivative, n)

    @classmethod
    def from_boundary_values(cls, values, n=None):
        """Lift from unit-modulus samples at the uniform angles."""
        v = np.asarray(values, dtype=complex)
        t = TWO_PI * np.arange(len(v)) / len(v)
        disp = np.unwrap(np.angle(v) - t)
        return cls(t + disp)

    # evaluation
    def lift(self, t):
        t = np.asarray(t, dtype=float)
        if self.func is not None:
            return self.func(t)
        return t + self._spline(np.mod(t, TWO_PI))

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        if self.dfunc is not None:
            return self.dfunc(t)
        return 1.0 + self._spline(np.mod(t, TWO_PI), 1)

    def __call__(self, z):
        """Action on unit-modulus points."""
        return np.exp(1j * self.lift(np.angle(z)))

    def is_monotone(self):
        g = self.lift_samples
        return bool(np.all(np.diff(g) > 0) and g[0] + TWO_PI > g[-1]
                    and np.all(self.deriv_samples > 0))

    def inverse_lift(self, phi, tol=1e-13, max_iter=200):
        """Solve G(t) = phi by bisection on the monotone lift."""
        phi = np.atleast_1d(np.asarray(phi, dtype=float))
        # bracket: G(t) - t is periodic, so t lies within its range from phi
        disp = self.lift_samples - self.theta
        lo = phi - disp.max() - 0.1
        hi = phi - disp.min() + 0.1
        if np.any(self.lift(lo) > phi) or np.any(self.lift(hi) < phi):
            raise MonotonicityError("inverse bracket failed; map not monotone?")
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            up = self.lift(mid) > phi
            hi = np.where(up, mid, hi)
            lo = np.where(up, lo, mid)
            if np.max(hi - lo) < tol:
                break
        else:
            raise MonotonicityError("bisection did not converge")
        return 0.5 * (lo + hi)

    # composition with Moebius maps (exact when callables are present)
    @classmethod
    def compose_mobius(cls, m, f):
        """Circle map m o f."""
        ff, df = f.lift, f.derivative
        fun = lambda t: m.boundary_angle(ff(t))
        dfun = lambda t: m.boundary_derivative(ff(t)) * df(t)
        if f.func is None:
            g = m.boundary_angle(f.lift_samples)
            d = m.boundary_derivative(f.lift_samples) * f.deriv_samples
            return cls(g, d)
        return cls.from_lift(fun, dfun, f.n)

    def precompose_mobius(self, m):
        """Circle map self o m."""
        fun = lambda t: self.lift(m.boundary_angle(t))
        dfun = lambda t: self.derivative(m.boundary_angle(t)) * m.boundary_derivative(t)
        if self.func is None:
            t = self.theta
            return CircleMap(fun(t), dfun(t))
        return CircleMap.from_lift(fun, dfun, self.n)

    def to_dict(self):
        return {"lift": [float(x) for x in self.lift_samples],
                "derivative": [float(x) for x in self.deriv_samples]}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["lift"]), np.asarray(d.get("derivative")) if d.get("derivative") else None)
