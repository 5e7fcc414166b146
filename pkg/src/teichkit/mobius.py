"""Moebius transformations of the disk, classification and word enumeration."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .grid import ArgumentError

PARABOLIC_TOL = 1e-10


class ClassificationError(ValueError):
    pass


class ConditioningError(ValueError):
    pass


@dataclass(frozen=True)
class MobiusMap:
    """z -> (a z + b) / (conj(b) z + conj(a)) with |a|^2 - |b|^2 = 1."""

    a: complex = 1.0 + 0j
    b: complex = 0j

    def __post_init__(self):
        a, b = complex(self.a), complex(self.b)
        det = abs(a) ** 2 - abs(b) ** 2
        if det <= 0:
            raise ArgumentError("not a disk automorphism (|a| <= |b|)")
        s = np.sqrt(det)
        object.__setattr__(self, "a", a / s)
        object.__setattr__(self, "b", b / s)

    # constructors
    @classmethod
    def identity(cls):
        return cls(1.0, 0.0)

    @classmethod
    def rotation(cls, angle):
        return cls(np.exp(0.5j * angle), 0.0)

    @classmethod
    def translation(cls, c):
        """z -> (z + c) / (1 + conj(c) z), sending 0 to c."""
        c = complex(c)
        if abs(c) >= 1:
            raise ArgumentError("|c| must be < 1")
        return cls(1.0, c)

    @classmethod
    def from_matrix(cls, m):
        """Disk automorphism from any SL(2,C)-like matrix preserving the disk."""
        m = np.asarray(m, dtype=complex)
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        m = m / np.sqrt(det)
        a, b = m[0, 0], m[0, 1]
        # projective sign: choose the representative with d ~ conj(a)
        if abs(m[1, 1] - np.conj(a)) > abs(m[1, 1] + np.conj(a)):
            a, b = -a, -b
        return cls(a, b)

    @classmethod
    def random(cls, rng, max_radius=0.6):
        c = max_radius * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        return cls.translation(c) @ cls.rotation(rng.uniform(0, 2 * np.pi))

    # algebra
    @property
    def matrix(self):
        return np.array([[self.a, self.b], [np.conj(self.b), np.conj(self.a)]])

    def __matmul__(self, other):
        """Composition: (self @ other)(z) = self(other(z))."""
        return MobiusMap.from_matrix(self.matrix @ other.matrix)

    def inverse(self):
        return MobiusMap(np.conj(self.a), -self.b)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = (self.a * z + self.b) / (np.conj(self.b) * z + np.conj(self.a))
        return complex(out) if out.ndim == 0 else out

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        out = 1.0 / (np.conj(self.b) * z + np.conj(self.a)) ** 2
        return complex(out) if out.ndim == 0 else out

    def apply_w(self, w):
        """The map in the chart w = 1/z: w -> 1 / self(1 / w), defined at w = 0."""
        w = np.asarray(w, dtype=complex)
        out = (np.conj(self.b) + np.conj(self.a) * w) / (self.a + self.b * w)
        return complex(out) if out.ndim == 0 else out

    def boundary_angle(self, theta):
        """Continuous lift of the induced circle map, normalized so the lift
        at theta = 0 lies in (-pi, pi]."""
        theta = np.asarray(theta, dtype=float)
        z = np.exp(1j * theta)
        base = np.angle(self(1.0 + 0j))
        # arg of the derivative factor is smooth, so integrate the phase change
        # exactly: arg M(e^{it}) = t + 2 arg(a) - 2 arg(1 + conj(b/a) e^{it})
        # ... up to the base value at t = 0
        ratio = np.conj(self.b / self.a)
        phase = theta - 2 * np.angle(1 + ratio * z) + 2 * np.angle(1 + ratio)
        return base + phase

    def boundary_derivative(self, theta):
        z = np.exp(1j * np.asarray(theta, dtype=float))
        return np.abs(self.derivative(z))

    @property
    def trace(self):
        return 2.0 * self.a.real

    def is_identity(self, tol=1e-12):
        return abs(self.b) < tol and abs(abs(self.a.real) - 1) < tol and abs(self.a.imag) < tol

    def fixed_points(self):
        """Fixed points of the Moebius map (two for non-identity elements)."""
        m = self.matrix
        a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
        if abs(c) < 1e-15:
            return [0j] if abs(b) < 1e-15 else [complex(np.inf)]
        disc = np.sqrt((a - d) ** 2 + 4 * b * c)
        return [complex((a - d + disc) / (2 * c)), complex((a - d - disc) / (2 * c))]

    def to_dict(self):
        return {"a_re": float(self.a.real), "a_im": float(self.a.imag),
                "b_re": float(self.b.real), "b_im": float(self.b.imag)}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        return cls(complex(d["a_re"], d["a_im"]), complex(d["b_re"], d["b_im"]))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def classify(m: MobiusMap) -> str:
    if m.is_identity():
        return "identity"
    t = abs(m.trace)
    if abs(t - 2) <= PARABOLIC_TOL:
        return "parabolic"
    return "hyperbolic" if t > 2 else "elliptic"


def translation_length(m: MobiusMap) -> float:
    """Hyperbolic translation length 2 arccosh(|tr| / 2)."""
    if classify(m) != "hyperbolic":
        raise ClassificationError(f"{classify(m)} element has no translation length")
    return float(2.0 * np.arccosh(abs(m.trace) / 2.0))


def multiplier(m: MobiusMap) -> float:
    """Derivative at the attracting boundary fixed point (in (0, 1))."""
    return float(np.exp(-translation_length(m)))


def attracting_fixed_point(m: MobiusMap) -> complex:
    pts = [p for p in m.fixed_points() if np.isfinite(p)]
    return min(pts, key=lambda p: abs(m.derivative(p)))


@dataclass(frozen=True)
class FuchsianSample:
    generators: tuple = ()
    word_length_cap: int = 4

    def words(self):
        """All reduced words up to the length cap (excluding the empty word)."""
        letters = []
        for g in self.generators:
            letters.append(g)
            letters.append(g.inverse())
        out = []
        # letters 2i and 2i+1 are mutually inverse
        frontier = [((), MobiusMap.identity())]
        for _ in range(self.word_length_cap):
            nxt = []
            for word, elt in frontier:
                for k, g in enumerate(letters):
                    if word and (word[-1] ^ 1) == k:
                        continue
                    w = (word + (k,), elt @ g)
                    nxt.append(w)
                    out.append(w)
            frontier = nxt
        return out


def lehner_check(sample: FuchsianSample, threshold=0.1):
    """Minimum translation length over enumerated hyperbolic words.

    This is finite evidence only: it can refute the Lehner condition on the
    sample, never certify it for the group.  ``satisfied`` is ``None`` when no
    hyperbolic word was found.
    """
    lengths = []
    for _, elt in sample.words():
        if classify(elt) == "hyperbolic":
            lengths.append(translation_length(elt))
    if not lengths:
        return {"min_length": None, "satisfied": None, "status": "indeterminate",
                "words_checked": 0, "finite_evidence_only": True}
    mn = float(min(lengths))
    return {"min_length": mn, "satisfied": bool(mn > threshold), "status": "evaluated",
            "words_checked": len(lengths), "finite_evidence_only": True}


def three_point_map(p, q):
    """Moebius transformation of the sphere with p[k] -> q[k], as a 2x2 matrix."""

    def to_std(z1, z2, z3):
        # cross-ratio map sending z1, z2, z3 -> 0, 1, inf
        return np.array([[z2 - z3, -z1 * (z2 - z3)], [z2 - z1, -z3 * (z2 - z1)]], dtype=complex)

    a = to_std(*p)
    b = to_std(*q)
    return np.linalg.inv(b) @ a


def normalize_fixing_1_i_minus1(f, tol=1e-8):
    """Post-compose a circle map with the disk automorphism fixing 1, i, -1.

    Returns ``(m, normalized)`` where ``normalized = m o f``.
    """
    from .circle import CircleMap

    targets = np.array([1.0, 1j, -1.0])
    imgs = np.exp(1j * f.lift(np.array([0.0, np.pi / 2, np.pi])))
    gaps = [abs(imgs[0] - imgs[1]), abs(imgs[1] - imgs[2]), abs(imgs[0] - imgs[2])]
    if min(gaps) < tol:
        raise ConditioningError(f"image triple nearly degenerate (min gap {min(gaps):.2e})")
    m = MobiusMap.from_matrix(three_point_map(imgs, targets))
    if np.max(np.abs(m(imgs) - targets)) > 1e-6:
        raise ConditioningError("normalization did not fix the triple")
    return m, CircleMap.compose_mobius(m, f)
