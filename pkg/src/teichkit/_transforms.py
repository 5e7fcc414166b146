"""Polar-mode singular integrals on the unit disk.

A function sampled on the polar grid is expanded in angle,
``h(r, t) = sum_n h_n(r) exp(i n t)``.  The Cauchy transform
``C h(z) = -(1/pi) int h(s) / (s - z) dA(s)`` and the Beurling transform
``T h = d/dz C h`` act mode by mode through one-dimensional radial integrals

    inner(g, a)(r) = int_0^r (s/r)^a g(s) ds/s
    outer(g, b)(r) = int_r^1 (r/s)^b g(s) ds/s

which are evaluated by scaled recursions over the radial nodes with exact
product weights for piecewise-linear ``g``.  The recursions never form
``r**a`` for large ``a``, so all modes are handled at double precision.
"""

from __future__ import annotations

import numpy as np


def mode_numbers(n):
    return np.fft.fftfreq(n, 1.0 / n).astype(int)


def to_modes(values):
    values = np.asarray(values, dtype=complex)
    return np.fft.fft(values, axis=-1) / values.shape[-1]


def from_modes(modes):
    modes = np.asarray(modes, dtype=complex)
    return np.fft.ifft(modes, axis=-1) * modes.shape[-1]


def shift_modes(modes, s):
    """Array G with G[..., n] = modes[..., n + s] (zero outside the band)."""
    n = modes.shape[-1]
    k = mode_numbers(n)
    src = k + s
    ok = (src >= -(n // 2)) & (src < n // 2)
    out = np.zeros_like(modes)
    out[..., ok] = modes[..., src[ok] % n]
    return out


def _e(b, logs):
    """(1 - s**b) / b with the b -> 0 limit -log(s); ``logs = log(s)``, s < 1."""
    b = np.asarray(b, dtype=float)
    small = np.abs(b) < 1e-12
    bb = np.where(small, 1.0, b)
    return np.where(small, -logs, -np.expm1(bb * logs) / bb)


def inner_integral(g, a, radii, linear_start, at_one=False):
    """inner(g, a) at every radius; g has shape (M, N) (radius, mode).

    ``a`` (length N, all > 0) are the exponents per column; ``linear_start``
    marks the columns where g vanishes linearly at the origin (otherwise g is
    taken constant on [0, r_0]).  With ``at_one`` the value at r = 1 is also
    returned, continuing g as a constant past the last node.
    """
    g = np.asarray(g, dtype=complex)
    r = np.asarray(radii, dtype=float)
    a = np.asarray(a, dtype=float)
    m = len(r)
    out = np.empty((m, g.shape[1]), dtype=complex)
    out[0] = g[0] * np.where(linear_start, 1.0 / (a + 1.0), 1.0 / a)
    for j in range(m - 1):
        logs = np.log(r[j] / r[j + 1])
        x = -np.expm1(logs)
        s = 1.0 - x
        sa = np.exp(a * logs)
        m0 = _e(a, logs)
        m1 = (_e(a + 1.0, logs) - s * m0) / x
        out[j + 1] = sa * out[j] + (m0 - m1) * g[j] + m1 * g[j + 1]
    if not at_one:
        return out
    logs = np.log(r[-1])
    end = np.exp(a * logs) * out[-1] + _e(a, logs) * g[-1]
    return out, end


def outer_integral(g, b, radii):
    """outer(g, b) at every radius; exponents ``b >= -1`` per column.

    g is continued as a constant on [r_last, 1].
    """
    g = np.asarray(g, dtype=complex)
    r = np.asarray(radii, dtype=float)
    b = np.asarray(b, dtype=float)
    m = len(r)
    out = np.empty((m, g.shape[1]), dtype=complex)
    out[-1] = _e(b, np.log(r[-1])) * g[-1]
    for j in range(m - 2, -1, -1):
        logs = np.log(r[j] / r[j + 1])
        x = -np.expm1(logs)
        s = 1.0 - x
        sb = np.exp(b * logs)
        m0 = _e(b, logs)
        m1 = s * (_e(b - 1.0, logs) - m0) / x
        out[j] = sb * out[j + 1] + (m0 - m1) * g[j] + m1 * g[j + 1]
    return out


def cauchy_modes(h, radii):
    """Modes of C h on the radial nodes, plus the modes of C h on |z| = 1.

    ``h`` are the angular modes of the density (shape (M, N)).  Returns
    ``(c, c_one)``; outside the disk C h = sum_{n<0} c_one[n] z**n.
    """
    n_theta = h.shape[1]
    n = mode_numbers(n_theta)
    r = np.asarray(radii, dtype=float)[:, None]
    hs = shift_modes(h, 1)  # hs[:, n] = h_{n+1}
    neg = n <= -1
    c = np.zeros_like(h)
    inn, inn1 = inner_integral(hs, np.abs(n) + 1.0, radii, (n + 1) != 0, at_one=True)
    out = outer_integral(hs, np.maximum(n - 1.0, -1.0), radii)
    c[:, neg] = 2.0 * r * inn[:, neg]
    c[:, ~neg] = -2.0 * r * out[:, ~neg]
    c_one = np.where(neg, 2.0 * inn1, 0.0)
    return c, c_one


def beurling_modes(h, radii):
    """Modes of T h on the radial nodes."""
    n_theta = h.shape[1]
    n = mode_numbers(n_theta)
    hs = shift_modes(h, 1)  # column n holds h_{n+1}; result lands in mode n-1
    inn = inner_integral(hs, np.abs(n) + 1.0, radii, (n + 1) != 0)
    out = outer_integral(hs, np.maximum(n - 1.0, -1.0), radii)
    t = hs.copy()
    neg = n <= -1
    pos = n >= 1
    t[:, neg] += 2.0 * n[neg] * inn[:, neg]
    t[:, pos] -= 2.0 * n[pos] * out[:, pos]
    return shift_modes(t, 1)  # result[:, m] = t[:, m + 1]
