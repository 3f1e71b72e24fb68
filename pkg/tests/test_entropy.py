import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from di_kit.entropy import (
    CQState,
    binary_entropy,
    cond_entropy,
    devetak_winter,
    measured_cond_entropy,
    shannon,
    von_neumann,
)
from di_kit.errors import BadFactorIndexError, RangeError
from di_kit.linalg import partial_trace
from di_kit.states import DensityMatrix, angle_pvm, purify, random_pure_state, werner_state


def test_binary_entropy_values():
    assert binary_entropy(0.0) == 0.0 and binary_entropy(1.0) == 0.0
    assert binary_entropy(0.5) == pytest.approx(1.0)
    want = -(0.02 * math.log(0.02) + 0.98 * math.log(0.98)) / math.log(2)
    assert binary_entropy(0.02) == pytest.approx(want, abs=1e-15)
    assert binary_entropy(0.02) == pytest.approx(0.141440542, abs=1e-9)
    with pytest.raises(RangeError):
        binary_entropy(-0.1)


def test_von_neumann_and_shannon():
    assert von_neumann(np.eye(4) / 4) == pytest.approx(2.0)
    assert von_neumann(werner_state(1.0)) == pytest.approx(0.0, abs=1e-12)
    assert shannon([0.5, 0.25, 0.25]) == pytest.approx(1.5)


def test_cond_entropy_bell_state():
    rho = werner_state(1.0)
    assert cond_entropy(rho, [1]) == pytest.approx(-1.0, abs=1e-12)
    assert cond_entropy(rho, []) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(BadFactorIndexError):
        cond_entropy(rho, [2])


def test_cq_state():
    cq = CQState((0.5, 0.5), (DensityMatrix(np.diag([1.0, 0])), DensityMatrix(np.diag([0, 1.0]))))
    assert cq.cond_entropy() == pytest.approx(0.0, abs=1e-12)
    same = DensityMatrix(np.eye(2) / 2)
    assert CQState((0.5, 0.5), (same, same)).cond_entropy() == pytest.approx(1.0)


def test_measured_entropy_werner():
    # Bell-diagonal closed form: H(Z_A|E) = 1 - H(lambda) + h(lambda_Phi+ + lambda_Phi-)
    v = 0.96
    psi, dims = purify(werner_state(v))
    got = measured_cond_entropy(psi, dims, angle_pvm(0.0), condition=2)
    lam = [(1 + 3 * v) / 4] + [(1 - v) / 4] * 3
    want = 1 - shannon(lam) + binary_entropy(lam[0] + lam[1])
    assert got == pytest.approx(want, abs=1e-10)
    assert got == pytest.approx(0.8995, abs=1e-4)
    assert got >= 1 - binary_entropy(0.02)
    assert devetak_winter(got, 0.1) == pytest.approx(got - 0.1)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from([(2, 2, 2), (2, 3, 2), (3, 2, 4)]))
def test_duality_on_pure_states(seed, dims):
    psi = random_pure_state(int(np.prod(dims)), np.random.default_rng(seed))
    rho = np.outer(psi, psi.conj())
    h_ae = cond_entropy(partial_trace(rho, dims, [0, 2]), [1], dims=(dims[0], dims[2]))
    h_ab = cond_entropy(partial_trace(rho, dims, [0, 1]), [1], dims=(dims[0], dims[1]))
    assert abs(h_ae + h_ab) <= 1e-9
