"""One-dimensional linearization and conjugation experiments.

Sternberg linearization of a hyperbolic germ g (g(0) = 0, g'(0) = a, 0 < a < 1)
by iterating the contraction

    F(psi) = (1/a) psi o g + (1/a) (g - a x),      h = x + psi,

so that h o g = a h.  The Koenigs limit a^(-n) g^n is kept as an independent
oracle.  On the circle, ``conjugate_circle`` forms f gamma f^-1 and
``promotion_experiment`` compares the regularity of f predicted from the local
linearizations at an attracting fixed point with the regularity measured
directly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from . import config
from .circle import TWO_PI, CircleMap, MonotonicityError
from .grid import ArgumentError, holder_ladder
from .mobius import MobiusMap, attracting_fixed_point, classify


class ResolutionError(ValueError):
    pass


class ContractionError(RuntimeError):
    def __init__(self, msg, factors=None):
        super().__init__(msg)
        self.factors = factors if factors is not None else []


def _holder_constant(x, d, alpha, max_points=1025):
    """sup |d(x) - d(y)| / |x - y|^alpha over pairs of a subsample plus
    all neighbouring pairs of the full grid."""
    x = np.asarray(x)
    d = np.asarray(d)
    if len(x) < 2:
        return 0.0
    best = float(np.max(np.abs(np.diff(d)) / np.diff(x) ** alpha))
    step = max(1, int(np.ceil(len(x) / max_points)))
    xs, ds = x[::step], d[::step]
    dx = np.abs(xs[:, None] - xs[None, :])
    dd = np.abs(ds[:, None] - ds[None, :])
    off = dx > 0
    best = max(best, float(np.max(dd[off] / dx[off] ** alpha)))
    return best


def sternberg_bound(a, alpha, c_delta, delta):
    """(1/a) [(a + c delta^alpha)^(1+alpha) + c delta^alpha]."""
    t = c_delta * delta**alpha
    return ((a + t) ** (1 + alpha) + t) / a


def graded_grid(delta, n_side=4000, floor=1e-30):
    """Symmetric grid with geometric spacing toward 0 (nodes +-delta q^j and 0).

    Relative spacing is constant, so the interpolation error of a C^(1+alpha)
    function at scale y is O(y^(1+alpha)) and does not feed the neutral
    direction of psi -> psi o g / a (see ``sternberg_linearize``).
    """
    pos = delta * np.geomspace(1.0, floor, n_side)[::-1]
    return np.concatenate([-pos[::-1], [0.0], pos])


@dataclass(frozen=True)
class Germ1D:
    """Germ g sampled on a symmetric grid of [-delta, delta] containing 0.

    ``a`` is g'(0); it is measured from the samples (or from ``func``) when
    not given.  ``dg`` holds derivative samples; numerical derivatives are
    used when neither ``dg`` nor ``dfunc`` is supplied.
    """

    x: np.ndarray
    g: np.ndarray
    alpha: float = 0.5
    a: Optional[float] = None
    dg: Optional[np.ndarray] = None
    func: Optional[Callable] = field(default=None, compare=False, repr=False)
    dfunc: Optional[Callable] = field(default=None, compare=False, repr=False)
    inverted: bool = False

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        g = np.asarray(self.g, dtype=float)
        if x.shape != g.shape or x.ndim != 1 or len(x) < 9 or len(x) % 2 == 0:
            raise ArgumentError("germ needs an odd number (>= 9) of samples")
        n0 = len(x) // 2
        if x[n0] != 0.0 or not np.all(np.diff(x) > 0) or np.max(np.abs(x + x[::-1])) > 1e-12 * x[-1]:
            raise ArgumentError("germ grid must be increasing and symmetric about 0")
        if abs(g[n0]) > 1e-14:
            raise ArgumentError(f"g(0) = {g[n0]:.3e} is not 0")
        if not np.all(np.diff(g) > 0):
            raise ArgumentError("germ is not strictly increasing")
        if not 0.0 < self.alpha < 1.0:
            raise ArgumentError("alpha must lie in (0, 1)")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "g", g)
        if self.dg is None:
            d = self.dfunc(x) if self.dfunc is not None else CubicSpline(x, g)(x, 1)
            object.__setattr__(self, "dg", np.asarray(d, dtype=float))
        if self.a is None:
            object.__setattr__(self, "a", self._measure_a())
        if not self.a > 0:
            raise ArgumentError("orientation-reversing germ")

    def _measure_a(self):
        if self.dfunc is not None:
            return float(self.dfunc(np.array([0.0]))[0])
        if self.func is not None:
            h = 1e-4 * self.delta
            d1 = (self.func(np.array([h]))[0] - self.func(np.array([-h]))[0]) / (2 * h)
            d2 = (self.func(np.array([h / 2]))[0] - self.func(np.array([-h / 2]))[0]) / h
            return float((4 * d2 - d1) / 3)
        # smallest symmetric pair of nodes
        n0 = len(self.x) // 2
        return float((self.g[n0 + 1] - self.g[n0 - 1]) / (self.x[n0 + 1] - self.x[n0 - 1]))

    # constructors
    @classmethod
    def from_callable(cls, func, delta, n=8001, alpha=0.5, a=None, dfunc=None, floor=1e-30):
        x = graded_grid(delta, max(4, n // 2), floor)
        return cls(x, np.asarray(func(x), dtype=float), alpha, a, None, func, dfunc)

    @classmethod
    def linear(cls, a, delta=0.5, n=8001, alpha=0.5):
        return cls.from_callable(lambda x: a * np.asarray(x), delta, n, alpha, a,
                                 lambda x: np.full(np.shape(x), float(a)))

    @property
    def delta(self):
        return float(self.x[-1])

    @property
    def n(self):
        return len(self.x)

    def c_delta(self, delta=None):
        """Measured Hoelder constant of g' on [-delta, delta]."""
        d = self.delta if delta is None else delta
        # uniform resampling: on the graded grid the finest pairs would only
        # measure the noise of the derivative samples
        xu = np.linspace(-d, d, 1025)
        du = self.dfunc(xu) if self.dfunc is not None else CubicSpline(self.x, self.dg)(xu)
        return _holder_constant(xu, du, self.alpha)

    def restrict(self, delta):
        sel = np.abs(self.x) <= delta * (1 + 1e-12)
        return Germ1D(self.x[sel], self.g[sel], self.alpha, self.a, self.dg[sel],
                      self.func, self.dfunc, self.inverted)

    def __call__(self, t):
        if self.func is not None:
            return self.func(np.asarray(t, dtype=float))
        return CubicSpline(self.x, self.g)(t)

    def normalized(self):
        """The germ with 0 < a < 1, inverting g when a > 1."""
        if self.a < 1:
            return self
        if self.a == 1:
            raise ArgumentError("g'(0) = 1: not hyperbolic")
        m = min(-self.g[0], self.g[-1])
        n = self.n
        y = graded_grid(m, n // 2)
        if self.func is not None:
            lo, hi = np.full(n, self.x[0]), np.full(n, self.x[-1])
            for _ in range(400):
                mid = 0.5 * (lo + hi)
                up = self.func(mid) > y
                hi = np.where(up, mid, hi)
                lo = np.where(up, lo, mid)
                if np.all(hi - lo <= 4e-16 * np.abs(mid)):
                    break
            xin = 0.5 * (lo + hi)
        else:
            xin = CubicSpline(self.g, self.x)(y)
        xin[n // 2] = 0.0
        dgi = 1.0 / (self.dfunc(xin) if self.dfunc is not None else
                     CubicSpline(self.x, self.dg)(xin))
        return Germ1D(y, xin, self.alpha, 1.0 / self.a, dgi, None, None, not self.inverted)

    def to_csv(self, path):
        np.savetxt(path, np.c_[self.x, self.g], delimiter=",", header="x,g", comments="",
                   fmt="%.17g")

    @classmethod
    def from_csv(cls, path, alpha=0.5, a=None):
        d = np.loadtxt(path, delimiter=",", skiprows=1)
        return cls(d[:, 0], d[:, 1], alpha, a)


def choose_delta(germ: Germ1D, target=None, min_points=65):
    """Largest grid node delta with contraction bound <= target and
    g([-delta, delta]) inside [-delta, delta].  Returns (delta, bound, c_delta)."""
    if not 0 < germ.a < 1:
        raise ArgumentError("choose_delta needs 0 < a < 1; normalize the germ first")
    target = config.get("contraction_target") if target is None else target
    n0 = germ.n // 2
    x, g = germ.x, germ.g

    def admissible(j):
        d = x[n0 + j]
        c = germ.c_delta(d)
        b = sternberg_bound(germ.a, germ.alpha, c, d)
        inside = g[n0 + j] <= d and g[n0 - j] >= -d
        return (b <= target and inside), b, c

    half = (min_points - 1) // 2
    ok, b, c = admissible(n0)
    if ok:
        return float(x[-1]), b, c
    lo, hi = half, n0
    ok_lo, b_lo, c_lo = admissible(lo)
    if not ok_lo:
        raise ResolutionError(f"no admissible delta at grid resolution (bound {b_lo:.3f} "
                              f"at delta = {x[n0 + lo]:.3e})")
    # the bound increases with delta: bisection on the grid index
    while hi - lo > 1:
        mid = (lo + hi) // 2
        ok_m, b_m, c_m = admissible(mid)
        if ok_m:
            lo, b_lo, c_lo = mid, b_m, c_m
        else:
            hi = mid
    return float(x[n0 + lo]), b_lo, c_lo


@dataclass
class Linearization:
    x: np.ndarray
    h: np.ndarray
    a: float
    delta: float
    residual: float
    iterations: int
    contraction_factor: float
    bound: float
    factors: list
    taylor2: float
    h_prime0: float
    interpolation_error: Optional[float] = None
    inverted: bool = False

    def __call__(self, t):
        return CubicSpline(self.x, self.h, extrapolate=False)(t)

    def inverse(self, y):
        return CubicSpline(self.h, self.x, extrapolate=False)(y)

    def derivative(self, n=4001):
        """h' resampled on a uniform grid: (x, h'(x))."""
        xu = np.linspace(self.x[0], self.x[-1], n)
        return xu, CubicSpline(self.x, self.h)(xu, 1)

    def report(self):
        return {"delta": self.delta, "contraction_factor": self.contraction_factor,
                "bound": self.bound, "iterations": self.iterations, "residual": self.residual,
                "taylor2": self.taylor2, "h_prime0": self.h_prime0, "a": self.a,
                "interpolation_error": self.interpolation_error, "inverted": self.inverted}

    def to_json(self):
        return json.dumps(self.report(), sort_keys=True)


def _taylor(x, h, delta):
    sp = CubicSpline(x, h)
    xu = np.linspace(-delta / 4, delta / 4, 201)
    c = np.polyfit(xu / delta, sp(xu) - xu, 4)[::-1]
    # the graded grid resolves 0, so h'(0) comes from the spline directly
    return float(c[2] / delta**2), float(sp(0.0, 1))


def _seminorm(x, psi, alpha):
    return _holder_constant(x, CubicSpline(x, psi)(x, 1), alpha, max_points=257)


def _iterate(x, g, a, tol, max_iter, alpha):
    psi_star = g - a * x
    psi = np.zeros_like(x)
    norms = []
    resid = np.inf

    def ratios():
        s = np.asarray(norms)
        # increments below this level are dominated by differentiation noise
        keep = s[:-1] > 1e-6 * s[0] if len(s) > 1 else []
        return list((s[1:] / s[:-1])[keep]) if len(s) > 1 and s[0] > 0 else []

    # Composition uses a not-a-knot cubic spline.  Local interpolation error
    # near 0 is amplified by 1/a along orbits, so a monotone (PCHIP) rule,
    # whose slope limiter is first order at the critical point of psi, loses
    # an order of accuracy here.
    for k in range(1, max_iter + 1):
        new = (CubicSpline(x, psi)(g) + psi_star) / a
        inc = new - psi
        psi = new
        norms.append(_seminorm(x, inc, alpha))
        h = x + psi
        resid = float(np.max(np.abs(CubicSpline(x, h)(g) - a * h)))
        if resid <= tol / 10 or np.max(np.abs(inc)) == 0.0:
            return psi, resid, k, ratios()
    raise ContractionError(f"no convergence in {max_iter} iterations (residual {resid:.2e})",
                           ratios())


def sternberg_linearize(germ: Germ1D, tol=1e-10, delta=None, max_iter=500, check_refinement=True):
    """Sternberg linearizer h (h o g = a h, h(0) = 0, h'(0) = 1) on [-delta, delta]."""
    germ0 = germ
    germ = germ.normalized()
    if delta is None:
        delta, bound, _ = choose_delta(germ)
    else:
        bound = sternberg_bound(germ.a, germ.alpha, germ.c_delta(delta), delta)
    sub = germ.restrict(delta)
    if not (sub.g[-1] <= sub.x[-1] and sub.g[0] >= sub.x[0]):
        raise ArgumentError("g does not map [-delta, delta] into itself")
    x, g, a = sub.x, sub.g, sub.a
    psi, resid, its, factors = _iterate(x, g, a, tol, max_iter, germ.alpha)
    measured = float(np.nanmax(factors)) if len(factors) else 0.0
    if measured > bound + 0.05:
        raise ContractionError(f"measured factor {measured:.3f} exceeds bound {bound:.3f}", factors)
    h = x + psi
    t2, hp = _taylor(x, h, delta)
    interp_err = None
    if check_refinement:
        # repeat on every other node (keeping 0) and compare on the shared nodes
        n0 = len(x) // 2
        idx = n0 + 2 * np.arange(-(n0 // 2), n0 // 2 + 1)
        if len(idx) >= 9:
            psic, _, _, _ = _iterate(x[idx], g[idx], a, tol, max_iter, germ.alpha)
            interp_err = float(np.max(np.abs(psic - psi[idx])))
    return Linearization(x, h, a if not germ.inverted else germ0.a, float(delta), resid, its,
                         measured, float(bound), list(map(float, factors)), t2, hp,
                         interp_err, germ.inverted)


def koenigs_oracle(germ: Germ1D, n=40, x=None):
    """a^(-n) g^n(x); returns (x, h, flagged).  ``flagged`` marks underflow
    of the orbit before convergence."""
    germ = germ.normalized()
    x = germ.x[np.abs(germ.x) <= germ.delta / 2] if x is None else np.asarray(x, dtype=float)
    y = x.copy()
    flagged = False
    for _ in range(n):
        y = germ(y)
    if germ.a**n * np.max(np.abs(x)) < 1e-280 or np.any((y == 0) & (x != 0)):
        flagged = True
    return x, y / germ.a**n, flagged


# circle experiments ---------------------------------------------------------------

def conjugate_circle(f: CircleMap, gamma: MobiusMap, n=None) -> CircleMap:
    """f o gamma o f^-1 with exact pointwise evaluation through bisection on f."""
    if not f.is_monotone():
        raise MonotonicityError("conjugating map is not monotone")
    n = f.n if n is None else n

    def inv(t):
        s = f.inverse_lift(t)
        for _ in range(2):  # Newton polish of the bisection root
            s = s - (f.lift(s) - t) / f.derivative(s)
        return s

    def lift(t):
        s = inv(t)
        return f.lift(gamma.boundary_angle(s))

    def dlift(t):
        s = inv(t)
        return f.derivative(gamma.boundary_angle(s)) * gamma.boundary_derivative(s) / f.derivative(s)

    return CircleMap.from_lift(lift, dlift, n)


def _local_germ(G: CircleMap, center, window, n, alpha, a, floor=1e-4):
    # lift values carry ~1e-16 absolute error, so the graded chart grid stops
    # well above that scale (see graded_grid)
    base = G.lift(np.array([center]))[0]
    return Germ1D.from_callable(lambda x: G.lift(center + np.asarray(x)) - base, window, n,
                                alpha, a, lambda x: G.derivative(center + np.asarray(x)), floor)


def promotion_experiment(f: CircleMap, gamma: MobiusMap, r_target=1.5, window=0.4, n=4001,
                         alphas=None, spread_points=32, tol=1e-9):
    """Regularity of f predicted from the linearizations of gamma and f gamma f^-1
    at the attracting fixed point, compared with direct measurement."""
    if classify(gamma) != "hyperbolic":
        raise ArgumentError("gamma must be hyperbolic")
    if r_target <= 1:
        raise ArgumentError("r_target must exceed 1")
    alpha = min(r_target - 1.0, 0.99) if r_target < 2 else 0.99
    alphas = alphas or [round(0.1 * i, 1) for i in range(1, 10)]
    report = {"r_target": r_target, "alpha": alpha,
              # one Moebius element at a time; uniform quasisymmetry of a
              # whole subgroup is not something a grid can check
              "scope": "single hyperbolic element conjugated by a fixture map"}
    p = attracting_fixed_point(gamma)
    tp = float(np.angle(p))
    a = float(gamma.boundary_derivative(tp))
    report["multiplier"] = a
    G1 = CircleMap.from_mobius(gamma, f.n)
    G2 = conjugate_circle(f, gamma)
    fp = float(f.lift(np.array([tp]))[0])
    g1 = _local_germ(G1, tp, window, n, alpha, a)
    g2 = _local_germ(G2, fp, window, n, alpha, a)
    # hypothesis: f gamma f^-1 is C^{1+alpha} near its fixed point
    xu = np.linspace(-window, window, n)
    _, bounded2, est2 = holder_ladder(g2.dfunc(xu), xu[1] - xu[0], alphas, periodic=False)
    report["conjugate_holder_exponent"] = est2
    report["conjugate_holder_bounded"] = {str(k): v for k, v in bounded2.items()}
    if not bounded2.get(round(alpha, 1), est2 >= alpha - 0.05) or est2 < alpha - 0.05:
        report["verdict"] = "hypothesis_failed"
        report["diagnostics"] = (f"f gamma f^-1 is not C^(1+{alpha:g}) at grid scale "
                                 f"(estimated derivative exponent {est2:.3f})")
        return report
    try:
        h1 = sternberg_linearize(g1, tol, check_refinement=False)
        h2 = sternberg_linearize(g2, tol, check_refinement=False)
    except (ResolutionError, ContractionError) as exc:
        report["verdict"] = "indeterminate"
        report["diagnostics"] = f"{type(exc).__name__}: {exc}"
        return report
    report["linearization"] = {"gamma": h1.report(), "conjugate": h2.report()}
    # local conjugacy predicted from the linearizers: phi = h2^-1 (f'(p) h1)
    c = float(f.derivative(np.array([tp]))[0])
    x = h1.x
    y = c * h1.h
    ok = (y >= h2.h[0]) & (y <= h2.h[-1])
    x, y = x[ok], y[ok]
    phi = h2.inverse(y)
    actual = f.lift(tp + x) - fp
    report["local_residual"] = float(np.max(np.abs(phi - actual)))
    xu = np.linspace(x[0], x[-1], n)
    dphi = CubicSpline(x, phi)(xu, 1)
    cn, bn, en = holder_ladder(dphi, xu[1] - xu[0], alphas, periodic=False)
    cg, bg, eg = holder_ladder(f.deriv_samples, TWO_PI / f.n, alphas, periodic=True)
    report["near_ladder"] = {str(k): v for k, v in cn.items()}
    report["near_bounded"] = {str(k): v for k, v in bn.items()}
    report["near_exponent"] = en
    report["global_ladder"] = {str(k): v for k, v in cg.items()}
    report["global_bounded"] = {str(k): v for k, v in bg.items()}
    report["global_exponent"] = eg
    # spreading: f(t) = G2^-n (f(gamma^n t)) with gamma^n t in the linearized window
    fixed = [q for q in gamma.fixed_points() if np.isfinite(q)]
    rep = max(fixed, key=lambda q: abs(gamma.derivative(q)))
    tr = float(np.angle(rep))
    ts = TWO_PI * (np.arange(spread_points) + 0.5) / spread_points
    ts = ts[np.abs(np.angle(np.exp(1j * (ts - tr)))) > 0.3]
    ginv = gamma.inverse()
    errs = []
    phi_interp = CubicSpline(x, phi, extrapolate=False)
    for t in ts:
        s, k = t, 0
        while True:
            off = np.angle(np.exp(1j * (s - tp)))
            if abs(off) <= 0.5 * x[-1] or k > 200:
                break
            s = float(gamma.boundary_angle(s))
            k += 1
        if k > 200:
            continue
        u = np.array([fp + float(phi_interp(off))])
        for _ in range(k):
            u = f.lift(ginv.boundary_angle(f.inverse_lift(u)))
        errs.append(abs(np.angle(np.exp(1j * (u[0] - f.lift(np.array([t]))[0])))))
    report["spread_residual"] = float(max(errs)) if errs else None
    keys = [k for k in alphas if k <= alpha + 1e-12]
    agree = all(bn[k] == bg[k] for k in keys)
    report["verdict"] = "consistent" if agree else "inconsistent"
    return report
