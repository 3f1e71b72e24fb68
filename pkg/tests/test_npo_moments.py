import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from di_kit.errors import LevelTooLowError
from di_kit.linalg import kron
from di_kit.npo.moments import (
    anticommuting_rule,
    build_moment_problem,
    cross_term_words,
    perfect_correlation_rules,
    words_up_to,
)
from di_kit.npo.words import FREE, Algebra, Party, anticommutator_sq, parse_word
from di_kit.states import DichotomicObservable, random_density_matrix

AB = Algebra((Party("A", 2), Party("B", 2)))


def test_word_counts():
    assert len(words_up_to(AB, 1)) == 5
    assert len(words_up_to(AB, 2)) == 13
    assert len(cross_term_words(AB)) == 9
    abe = Algebra((Party("A", 2), Party("B", 2), Party("E", 2, FREE)))
    assert len(words_up_to(abe, 2)) == 49


def test_level_too_low():
    with pytest.raises(LevelTooLowError):
        build_moment_problem(AB, 1, objective=anticommutator_sq(("A", 0), ("A", 1)))
    with pytest.raises(LevelTooLowError):
        build_moment_problem(AB, 0)


def test_kernel_rules_from_data():
    rules = perfect_correlation_rules([("A0 B0", 1.0), ("A1", -1.0), ("A0 B1", 0.5)])
    assert len(rules) == 2
    assert rules[1][2] == -1.0
    lhs, rhs, sign = anticommuting_rule("A")
    assert sign == -1.0 and lhs[::-1] == rhs


def _model_moments(problem, ops, rho):
    """Moment vector of an explicit operator model: y_k = tr(rho * word_k)."""
    y = np.zeros(problem.n_vars)
    for k, w in enumerate(problem.keys):
        m = np.eye(rho.shape[0], dtype=complex)
        for l in w:
            m = m @ ops[(l.party, l.index)]
        y[k] = np.trace(rho @ m).real
    return y


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1), st.lists(st.floats(0, np.pi), min_size=4, max_size=4))
def test_explicit_model_moment_matrix_is_psd(seed, angles):
    rho = random_density_matrix((2, 2), np.random.default_rng(seed)).mat
    obs = [DichotomicObservable.at_angle(t).matrix for t in angles]
    ops = {("A", 0): kron(obs[0], np.eye(2)), ("A", 1): kron(obs[1], np.eye(2)),
           ("B", 0): kron(np.eye(2), obs[2]), ("B", 1): kron(np.eye(2), obs[3])}
    problem = build_moment_problem(AB, 2)
    y = _model_moments(problem, ops, rho)
    # real part of the moment matrix of a quantum model is PSD
    assert np.linalg.eigvalsh(problem.moment_matrix(y))[0] >= -1e-10
    lin = problem.linear(anticommutator_sq(("A", 0), ("A", 1)))
    assert problem.evaluate(lin, y) == pytest.approx(4 * np.cos(angles[0] - angles[1]) ** 2, abs=1e-10)


def test_problem_serialises():
    p = build_moment_problem(AB, 1, stats=[("A0", 0.2)], objective={parse_word("A1"): 1.0})
    d = p.to_dict()
    assert d["index_words"][0] == "1" and len(d["grid"]) == 5
    assert p.to_json()
