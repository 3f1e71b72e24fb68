import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from di_kit.bounds import (
    JordanBlocks,
    OverlapBound,
    RateCertificate,
    SelfTestParams,
    anticom_com_identity_residual,
    eur_rate,
    jordan_overlap_oracle,
    overlap_from_anticommutator_norm,
    overlap_from_moment_bound,
    prop2_rate,
    thm1_rate,
)
from di_kit.entropy import binary_entropy
from di_kit.errors import RangeError
from di_kit.linalg import anticommutator, commutator, op_norm
from di_kit.states import DichotomicObservable

H02 = binary_entropy(0.02)


def test_overlap_examples():
    assert overlap_from_anticommutator_norm(0) == 0.5
    assert overlap_from_anticommutator_norm(2) == 1.0
    assert overlap_from_anticommutator_norm(1) == 0.75
    with pytest.raises(RangeError):
        overlap_from_anticommutator_norm(2.5)
    assert overlap_from_moment_bound(0) == 0.5
    assert overlap_from_moment_bound(4) == 1.0
    assert overlap_from_moment_bound(1) == 0.75
    with pytest.raises(RangeError):
        overlap_from_moment_bound(4.1)


def test_prop2_examples():
    assert prop2_rate(0, 0.02).rate == pytest.approx(0.858559, abs=1e-5)
    assert prop2_rate(0, 0.02).rate == pytest.approx(1 - H02, abs=1e-15)
    assert prop2_rate(2, 0.1).rate == pytest.approx(-binary_entropy(0.1))
    assert prop2_rate(0, 0).rate == 1.0


def test_eur_examples():
    assert eur_rate(0.5, 0.02, 0.02).rate == pytest.approx(0.717119, abs=1e-5)
    assert eur_rate(1.0, 0.1, 0.1).rate == pytest.approx(-2 * binary_entropy(0.1))
    assert eur_rate(0.5, 0, 0).rate == 1.0
    with pytest.raises(RangeError):
        eur_rate(0.4, 0, 0)


def test_thm1_examples():
    assert thm1_rate(SelfTestParams(0.0), 0.02, 0.02).rate == pytest.approx(0.717119, abs=1e-5)
    assert thm1_rate(SelfTestParams(0.0), 0, 0).rate == 1.0
    eps = (1 / 32) ** 2  # delta = 1/32 with C = 1
    assert thm1_rate(SelfTestParams(eps), 0, 0).rate == pytest.approx(0.0, abs=1e-15)
    cert = thm1_rate(SelfTestParams(1.0), 0.0, 0.0)
    assert cert.vacuous and cert.rate == -1.0
    assert cert.residuals["c_A_star"] == 1.0


def test_self_test_params():
    p = SelfTestParams(0.01, 2.0)
    assert p.delta == pytest.approx(0.2, abs=1e-12)
    with pytest.raises(RangeError):
        SelfTestParams(-0.1)
    with pytest.raises(RangeError):
        SelfTestParams(0.1, 0.0)


def test_overlap_bound_invariant():
    OverlapBound(c_star=0.6, c_A_star=0.3)
    with pytest.raises(RangeError):
        OverlapBound(c_star=0.9, c_A_star=0.3)


def test_certificate_json():
    cert = thm1_rate(SelfTestParams(1e-4, 1.0), 0.01, 0.02)
    d = cert.to_dict()
    assert set(d) >= {"rate", "tier", "epsilon", "delta_constant", "c_star", "q_x", "q_z", "residuals"}
    assert RateCertificate.from_dict(d) == cert
    with pytest.raises(RangeError):
        RateCertificate(rate=0.1, tier="npo-eur")
    with pytest.raises(RangeError):
        RateCertificate(rate=0.1, tier="bogus")


def test_jordan_examples():
    assert jordan_overlap_oracle(JordanBlocks((1.0,), (np.pi / 2,))) == pytest.approx((0.5, 0.0))
    assert jordan_overlap_oracle(JordanBlocks((1.0,), (0.0,))) == pytest.approx((1.0, 4.0))
    c, s = jordan_overlap_oracle(JordanBlocks((0.5, 0.5), (0.0, np.pi / 2)))
    assert (c, s) == pytest.approx((0.75, 2.0))
    assert overlap_from_moment_bound(s) == pytest.approx(0.5 + math.sqrt(2) / 4)
    with pytest.raises(RangeError):
        JordanBlocks((0.5, 0.6), (0.0, 1.0))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.floats(0.01, 1.0), st.floats(0.0, np.pi)), min_size=1, max_size=6))
def test_moment_converter_is_conservative(blocks):
    w = np.array([b[0] for b in blocks])
    w = w / w.sum()
    c, s = jordan_overlap_oracle(JordanBlocks(tuple(w), tuple(b[1] for b in blocks)))
    assert c <= overlap_from_moment_bound(min(s, 4.0)) + 1e-12


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, np.pi))
def test_prop2_consistency_loop(theta):
    a = DichotomicObservable.at_angle(0.0).matrix
    b = DichotomicObservable.at_angle(theta).matrix
    norm = op_norm(anticommutator(a, b))
    assert norm == pytest.approx(2 * abs(np.cos(theta)), abs=1e-10)
    q = 0.03
    want = -math.log2((1 + abs(np.cos(theta))) / 2) - binary_entropy(q)
    assert prop2_rate(min(norm, 2.0), q).rate == pytest.approx(want, abs=1e-10)
    ac, cm = anticommutator(a, b), commutator(a, b)
    s = np.trace(ac @ ac).real / 2
    k = np.trace(cm.conj().T @ cm).real / 2
    assert anticom_com_identity_residual(s, k) <= 1e-10


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 0.1), st.floats(0.0, 0.1), st.floats(0.0, 0.1))
def test_thm1_monotone_in_epsilon(e1, e2, q):
    lo, hi = sorted((e1, e2))
    assert thm1_rate(SelfTestParams(hi), q, q).rate <= thm1_rate(SelfTestParams(lo), q, q).rate + 1e-15
