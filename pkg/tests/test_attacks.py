import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from di_kit.attacks import attack_oracle, bell_diagonal_weights, block_entropy, mixture_rate, p_max_exact
from di_kit.bell import chsh_winning_prob, correlations, chsh_pvms
from di_kit.entropy import binary_entropy, shannon
from di_kit.errors import RangeError
from di_kit.states import werner_state


def test_ceiling_examples():
    assert attack_oracle(0.0, [1.0]).exact == pytest.approx(1.0, abs=1e-9)
    assert attack_oracle(0.5, [0.99]).exact <= 0.0
    with pytest.raises(RangeError):
        attack_oracle(0.6, [0.99])


def test_ceiling_reference_point():
    # grid minimisation is the oracle; values frozen from it
    c = attack_oracle(0.02, [0.99, 0.99], caps=[0.3120638475816836])
    assert c.exact == pytest.approx(0.6844418620, abs=1e-8)
    assert c.relaxed == pytest.approx(0.6418835225, abs=1e-8)
    assert c.relaxed <= c.exact
    assert c.p_relaxed >= c.p_exact == pytest.approx(p_max_exact(0.99))


def test_classical_weight_reproduces_local_table():
    # a mixture with classical weight p_max reaches exactly the Werner(v) CHSH score
    v = 0.99
    p = p_max_exact(v)
    omega_werner = chsh_winning_prob(correlations(werner_state(v), *chsh_pvms()))
    # classical branch wins with 3/4, quantum (ideal) branch with the Tsirelson value
    omega_mix = p * 0.75 + (1 - p) * (2 + np.sqrt(2)) / 4
    assert omega_mix == pytest.approx(omega_werner, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 0.2), st.floats(0.0, 1.0))
def test_block_entropy_closed_form(q, frac):
    w = bell_diagonal_weights(q, frac * q)
    want = 1 - shannon(w) + binary_entropy(w[0] + w[1])
    assert block_entropy(w) == pytest.approx(want, abs=1e-9)


def test_mixture_rate_endpoints():
    assert mixture_rate(0.0, 0.0) == pytest.approx(1.0, abs=1e-9)
    assert mixture_rate(0.1, 1.0) == pytest.approx(-binary_entropy(0.1))
    assert mixture_rate(0.4, 0.5) is None
