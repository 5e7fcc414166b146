"""Independent reference computations for the test suite.

Each oracle takes a different route from the package: closed forms,
adaptive quadrature, generic root finders, power series.  Values computed
here are frozen into the tests (see FROZEN) so a regression in either side
shows up.
"""

import numpy as np
from scipy import integrate, optimize


# closed forms --------------------------------------------------------------------

def schwarzian_z_plus_k_over_z(z, k):
    """S of F(z) = z + k/z, by hand: F' = 1 - k/z^2, F'' = 2k/z^3, F''' = -6k/z^4."""
    z = np.asarray(z, dtype=complex)
    f1, f2, f3 = 1 - k / z**2, 2 * k / z**3, -6 * k / z**4
    return f3 / f1 - 1.5 * (f2 / f1) ** 2


def schwarzian_fd(F, z, h=4e-3):
    """Schwarzian of an analytic callable from 5-point finite differences, with one
    Richardson step (h, h/2)."""
    return (4 * _schwarzian_fd(F, z, h / 2) - _schwarzian_fd(F, z, h)) / 3


def _schwarzian_fd(F, z, h):
    z = np.asarray(z, dtype=complex)
    f = [F(z + j * h) for j in (-2, -1, 0, 1, 2)]
    d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
    d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h**2)
    d3 = (-f[0] + 2 * f[1] - 2 * f[3] + f[4]) / (2 * h**3)
    return d3 / d1 - 1.5 * (d2 / d1) ** 2


def exterior_weight(z):
    """rho_{D*}(z)^(-2) = (|z|^2 - 1)^2 / 4."""
    return (np.abs(z) ** 2 - 1) ** 2 / 4


# quadrature ----------------------------------------------------------------------

def radial_p_norm(profile, p):
    """(2 pi int_0^1 |m(r)|^p (2/(1-r^2))^2 r dr)^(1/p) for a rotation-invariant |mu|."""
    val, _ = integrate.quad(lambda r: abs(profile(r)) ** p * (2 / (1 - r * r)) ** 2 * r, 0, 1,
                            limit=200)
    return (2 * np.pi * val) ** (1 / p)


# Douady-Earle barycenter ------------------------------------------------------------

def barycenter(lift, z, nodes=4096):
    """w with mean over the circle of (g - w)/(1 - conj(w) g) = 0, g = exp(i lift(t)) pulled
    back by the disk automorphism sending 0 to z.  Solved with a generic root finder."""
    t = 2 * np.pi * np.arange(nodes) / nodes
    zeta = np.exp(1j * t)
    # harmonic measure of z: pull the uniform nodes back through T_z(s) = (s + z)/(1 + conj(z) s)
    pts = (zeta + z) / (1 + np.conj(z) * zeta)
    u = np.exp(1j * lift(np.angle(pts)))

    def eq(v):
        w = v[0] + 1j * v[1]
        m = np.mean((u - w) / (1 - np.conj(w) * u))
        return [m.real, m.imag]

    w0 = np.mean(u)
    sol = optimize.root(eq, [w0.real, w0.imag], tol=1e-15)
    return sol.x[0] + 1j * sol.x[1]


# linearization --------------------------------------------------------------------

def koenigs_series(a, c, order=80):
    """Coefficients b_n of h(x) = x + sum b_n x^n with h(a x + c x^2) = a h(x).

    Matching x^n: sum_m b_m [x^n](a x + c x^2)^m = a b_n.
    """
    b = np.zeros(order + 1)
    b[1] = 1.0
    # powers P[m] = coefficients of (a x + c x^2)^m
    P = [np.array([1.0])]
    for m in range(1, order + 1):
        P.append(np.convolve(P[-1], [0.0, a, c]))
    for n in range(2, order + 1):
        s = sum(b[m] * (P[m][n] if n < len(P[m]) else 0.0) for m in range(1, n))
        b[n] = s / (a - a**n)
    return b


def koenigs_series_eval(x, a, c, order=80):
    b = koenigs_series(a, c, order)
    return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), b)


def sternberg_bound_formula(a, alpha, c, delta):
    """(1/a)[(a + c delta^alpha)^(1+alpha) + c delta^alpha]."""
    s = c * delta**alpha
    return ((a + s) ** (1 + alpha) + s) / a


# Moebius ------------------------------------------------------------------------------

def real_translation_length(c):
    """z -> (z + c)/(1 + c z): multiplier (1 + c)/(1 - c) at the repelling end."""
    return float(np.log((1 + c) / (1 - c)))


# frozen values (computed with the routines above, recorded here) ---------------------

FROZEN = {
    # 2/(1 - r^2) at r = 0.5, 0.9
    "rho_disk_0.5": 2.6666666666666665,
    "rho_disk_0.9": 10.526315789473687,
    # S(z + 0.1/z) at z = 2 and its weighted modulus
    "schwarzian_k0.1_z2": -0.03944773175542407,
    "weighted_k0.1_z2": 0.08875739644970415,
    # p = 2 norm of 0.1 (1 - |z|^2): 0.04 pi, reported as the norm squared
    "p2_bel0_0.1_sq": 0.12566370614359174,
    # translation length of z -> (z + 0.5)/(1 + 0.5 z)
    "length_c0.5": 1.0986122886681098,
    # second Taylor coefficient of h for g = 0.5 x + 0.1 x^2
    "koenigs_b2": 0.4,
    "koenigs_b3": 0.10666666666666667,
    # contraction bound examples, a = 0.5, alpha = 0.5, c_delta = 1
    "bound_delta_0.01": 1.12951600308978,
    "bound_delta_0.0004": 0.7899546652965098,
}
