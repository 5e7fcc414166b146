import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import FROZEN, real_translation_length
from teichkit.circle import CircleMap
from teichkit.mobius import (ClassificationError, FuchsianSample, MobiusMap, classify,
                             lehner_check, multiplier, normalize_fixing_1_i_minus1,
                             translation_length)

c_half = MobiusMap.translation(0.5)


def test_classify():
    assert classify(MobiusMap.identity()) == "identity"
    assert classify(c_half) == "hyperbolic"
    assert abs(c_half.trace) == pytest.approx(2 / np.sqrt(0.75), rel=1e-14)
    assert classify(MobiusMap.rotation(np.pi / 3)) == "elliptic"


def test_translation_length():
    assert translation_length(c_half) == pytest.approx(FROZEN["length_c0.5"], rel=1e-13)
    assert translation_length(c_half) == pytest.approx(real_translation_length(0.5), rel=1e-13)
    assert translation_length(c_half @ c_half) == pytest.approx(2 * np.log(3), rel=1e-13)
    lengths = [translation_length(MobiusMap.translation(c)) for c in (1e-1, 1e-2, 1e-3)]
    assert np.allclose(lengths, [real_translation_length(c) for c in (1e-1, 1e-2, 1e-3)], rtol=1e-9)
    assert lengths[-1] < 2.1e-3
    assert multiplier(c_half) == pytest.approx(1 / 3, rel=1e-13)
    with pytest.raises(ClassificationError):
        translation_length(MobiusMap.rotation(1.0))


def test_lehner():
    rep = lehner_check(FuchsianSample((c_half,)), 0.1)
    assert rep["min_length"] == pytest.approx(np.log(3), rel=1e-12) and rep["satisfied"]
    assert rep["finite_evidence_only"]
    assert lehner_check(FuchsianSample(()))["status"] == "indeterminate"
    # ping-pong pair with axes through +-1 and +-i
    g1, g2 = MobiusMap.translation(0.9), MobiusMap.translation(0.9j)
    rep = lehner_check(FuchsianSample((g1, g2), 3))
    assert rep["min_length"] > 0 and rep["words_checked"] > 10


def test_normalize():
    m, f = normalize_fixing_1_i_minus1(CircleMap.identity())
    assert m.is_identity(1e-10)
    g = CircleMap.from_mobius(MobiusMap.random(np.random.default_rng(5)))
    m, f = normalize_fixing_1_i_minus1(g)
    assert np.max(np.abs(np.exp(1j * f.lift_samples) - np.exp(1j * f.theta))) < 1e-10
    m, f = normalize_fixing_1_i_minus1(CircleMap.rotation(np.pi / 2))
    t = np.linspace(0, 6, 13)
    assert np.allclose(np.exp(1j * m.boundary_angle(t)), np.exp(1j * (t - np.pi / 2)), atol=1e-12)


moebius = st.builds(lambda r, t, s: MobiusMap.translation(r * np.exp(1j * t)) @ MobiusMap.rotation(s),
                    st.floats(0, 0.8), st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi))


@given(moebius, moebius)
def test_group_law(m1, m2):
    z = np.array([0.3 + 0.1j, -0.5j, 0.0, 0.9])
    assert np.allclose((m1 @ m2)(z), m1(m2(z)), atol=1e-12)
    assert np.allclose((m1 @ m1.inverse())(z), z, atol=1e-12)
    # boundary action agrees with the disk action on the circle
    t = np.linspace(0, 2 * np.pi, 9)
    assert np.allclose(np.exp(1j * m1.boundary_angle(t)), m1(np.exp(1j * t)), atol=1e-12)


@given(moebius)
def test_trace_conjugation_invariant(m):
    h = MobiusMap.translation(0.4 + 0.2j)
    assert abs(abs((h @ m @ h.inverse()).trace) - abs(m.trace)) < 1e-10


def test_json_roundtrip():
    m = MobiusMap.random(np.random.default_rng(3))
    m2 = MobiusMap.from_json(m.to_json())
    assert np.allclose(m.matrix, m2.matrix, atol=1e-15)
