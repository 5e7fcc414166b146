"""Named fixtures: Beltrami fields, base points, quadratic forms, circle maps,
Moebius elements and germs.  Everything used by the acceptance suite and the
CLI is constructed here by name so runs are reproducible."""

from __future__ import annotations

import numpy as np

from .beltrami import BeltramiField
from .bers import QuadraticForm, b_norm
from .circle import CircleMap
from .dynamics import Germ1D
from .grid import ArgumentError, GridSpec
from .mobius import MobiusMap


def _w(z):
    return 1.0 - np.abs(z) ** 2


# Beltrami fields ------------------------------------------------------------------
# (callable, description).  Vanishing families decay like (1 - |z|^2)^s.
FIELDS = {
    "zero": (lambda z: np.zeros_like(z), "mu = 0"),
    "const0.05": (lambda z: np.full_like(z, 0.05), "constant 0.05"),
    "const0.1": (lambda z: np.full_like(z, 0.1), "constant 0.1"),
    "const0.2": (lambda z: np.full_like(z, 0.2), "constant 0.2"),
    "generic": (lambda z: 0.2 * z + 0.1 * np.conj(z) ** 2, "0.2 z + 0.1 conj(z)^2"),
    "bel0": (lambda z: 0.2 * _w(z), "0.2 (1 - |z|^2), vanishing"),
    "ap2": (lambda z: 0.2 * _w(z) ** 0.75, "0.2 (1 - |z|^2)^0.75, in A^2"),
    "ap4": (lambda z: 0.2 * z * _w(z) ** 0.6, "0.2 z (1 - |z|^2)^0.6, in A^4"),
    "holder0.3": (lambda z: 0.2 * z * _w(z) ** 0.3, "0.2 z (1 - |z|^2)^0.3, Hoelder weight 0.3"),
    "holder0.5": (lambda z: 0.2 * z**2 * _w(z) ** 0.5, "0.2 z^2 (1 - |z|^2)^0.5, Hoelder weight 0.5"),
}

# coset families of the acceptance suite: fixture name -> space
COSET_FAMILIES = {
    "bel0": "B0",
    "ap2": "Ap:2",
    "ap4": "Ap:4",
    "holder0.3": "B0alpha:0.3",
    "holder0.5": "B0alpha:0.5",
}

BASE_POINTS = {
    "nu_z": (lambda z: 0.2 * z, "0.2 z"),
    "nu_zbar2": (lambda z: 0.2 * np.conj(z) ** 2, "0.2 conj(z)^2"),
    "nu_z3": (lambda z: 0.1 * (1 + z**3), "0.1 (1 + z^3)"),
}


def field(name, spec=None) -> BeltramiField:
    spec = spec or GridSpec()
    if name.startswith("radial"):
        return BeltramiField.radial_stretch(float(name[len("radial"):]), spec)
    table = {**FIELDS, **BASE_POINTS}
    if name not in table:
        raise ArgumentError(f"unknown field fixture {name!r}; known: {sorted(table) + ['radial<K>']}")
    func = table[name][0]
    return BeltramiField.from_callable(lambda z: func(np.asarray(z, dtype=complex)), spec, name)


def random_field(rng, spec=None, sup=0.3, name="random"):
    """Low-degree polynomial field in z, conj z with sup norm at most ``sup``."""
    c = rng.normal(size=6) + 1j * rng.normal(size=6)
    c *= sup / np.sum(np.abs(c))

    def f(z):
        z = np.asarray(z, dtype=complex)
        zb = np.conj(z)
        return c[0] + c[1] * z + c[2] * zb + c[3] * z**2 + c[4] * zb**2 + c[5] * z * zb

    return BeltramiField.from_callable(f, spec or GridSpec(), name)


# quadratic forms -------------------------------------------------------------------

def random_form(rng, spec=None, target=0.4, degree=4, name="form"):
    """phi_w = sum_j c_j w^j rescaled to b_norm = target."""
    c = (rng.normal(size=degree + 1) + 1j * rng.normal(size=degree + 1)) / (1 + np.arange(degree + 1))
    phi = QuadraticForm.monomials(c, spec, name)
    return phi.scale(target / b_norm(phi))


FORMS = {
    "form_zero": lambda spec: QuadraticForm.zero(spec),
    "form_w2": lambda spec: QuadraticForm.monomials([0, 0, 1.0], spec, "w^2"),
    "form_random": lambda spec: random_form(np.random.default_rng(0), spec, 0.4, name="form_random"),
}


def form(name, spec=None):
    if name not in FORMS:
        raise ArgumentError(f"unknown form fixture {name!r}; known: {sorted(FORMS)}")
    return FORMS[name](spec or GridSpec())


# circle maps --------------------------------------------------------------------------

def _cusp_lift(eps, power, center=0.0):
    """t + eps |s|^power, s = 2 sin((t - center)/2): periodic displacement whose
    derivative has one cusp of exponent power - 1 at ``center``."""

    def f(t):
        s = 2 * np.sin((np.asarray(t) - center) / 2)
        return np.asarray(t) + eps * np.abs(s) ** power

    def df(t):
        t = np.asarray(t)
        s = 2 * np.sin((t - center) / 2)
        return 1.0 + eps * power * np.sign(s) * np.abs(s) ** (power - 1) * np.cos((t - center) / 2)

    return f, df


def _affine_boundary(n):
    from .solver import solve_disk
    f = solve_disk(BeltramiField.constant(0.1, GridSpec()))
    return f.boundary_map


CIRCLE_MAPS = {
    "identity": lambda n: CircleMap.identity(n),
    "mobius": lambda n: CircleMap.from_mobius(MobiusMap.random(np.random.default_rng(1)), n),
    "sine": lambda n: CircleMap.from_lift(lambda t: t + 0.1 * np.sin(t),
                                          lambda t: 1 + 0.1 * np.cos(t), n),
    "affine_boundary": _affine_boundary,
    "cusp0.5": lambda n: CircleMap.from_lift(*_cusp_lift(0.1, 1.5), n),
    "cusp0.3": lambda n: CircleMap.from_lift(*_cusp_lift(0.1, 1.3, 0.2), n),
}


def circle_map(name, n=512) -> CircleMap:
    if name not in CIRCLE_MAPS:
        raise ArgumentError(f"unknown circle map fixture {name!r}; known: {sorted(CIRCLE_MAPS)}")
    return CIRCLE_MAPS[name](n)


MOBIUS = {
    "identity": lambda: MobiusMap.identity(),
    "hyp0.5": lambda: MobiusMap.translation(0.5),
    "hyp0.3i": lambda: MobiusMap.translation(0.3j),
    "random": lambda: MobiusMap.random(np.random.default_rng(2)),
}


def mobius(name) -> MobiusMap:
    if name not in MOBIUS:
        raise ArgumentError(f"unknown Moebius fixture {name!r}; known: {sorted(MOBIUS)}")
    return MOBIUS[name]()


# germs ------------------------------------------------------------------------------

GERMS = {
    "linear": lambda: Germ1D.linear(0.5),
    "quadratic": lambda: Germ1D.from_callable(lambda x: 0.5 * x + 0.1 * x**2, 0.5, a=0.5,
                                              dfunc=lambda x: 0.5 + 0.2 * x),
    "c1.5": lambda: Germ1D.from_callable(lambda x: 0.5 * x + 0.05 * x * np.abs(x) ** 0.5, 0.5,
                                         a=0.5, dfunc=lambda x: 0.5 + 0.075 * np.abs(x) ** 0.5),
    "expanding": lambda: Germ1D.from_callable(lambda x: 2 * x + 0.1 * x**2, 0.5, a=2.0,
                                              dfunc=lambda x: 2 + 0.2 * x),
}


def germ(name) -> Germ1D:
    if name not in GERMS:
        raise ArgumentError(f"unknown germ fixture {name!r}; known: {sorted(GERMS)}")
    return GERMS[name]()


def catalog():
    return {
        "fields": sorted(FIELDS) + sorted(BASE_POINTS) + ["radial<K>"],
        "forms": sorted(FORMS),
        "circle_maps": sorted(CIRCLE_MAPS),
        "mobius": sorted(MOBIUS),
        "germs": sorted(GERMS),
    }
