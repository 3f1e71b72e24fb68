import numpy as np
import pytest

from di_kit.equivalence import (
    RoutedModel,
    check_equivalence,
    random_routed_model,
    translate_routed_model,
)
from di_kit.errors import MarginalMismatchError
from di_kit.linalg import kron
from di_kit.states import PVM, DensityMatrix, angle_pvm, random_density_matrix


def _product_model():
    a = np.diag([0.7, 0.3])
    b = np.diag([0.4, 0.6])
    t = np.diag([1.0, 0.0])
    rho = DensityMatrix(kron(a, b, t), (2, 2, 2))
    trivial = PVM((np.eye(2),))
    return RoutedModel(rho, rho, (angle_pvm(0.0),), (angle_pvm(1.0),), (trivial,))


def test_product_state_trivial_tester():
    m = _product_model()
    r = check_equivalence(m)
    assert r.stat_deviation <= 1e-12 and r.entropy_deviation <= 1e-12


def test_equal_states_give_identity_uhlmann(rng):
    rho = random_density_matrix((2, 2, 2), rng)
    pvms = (angle_pvm(0.0), angle_pvm(np.pi / 2))
    m = RoutedModel(rho, rho, pvms, pvms, pvms)
    out = translate_routed_model(m)
    w = out.uhlmann
    assert np.allclose(w.conj().T @ w, np.eye(w.shape[1]), atol=1e-9)
    assert check_equivalence(m).stat_deviation <= 1e-10


def test_marginal_mismatch_rejected(rng):
    a = DensityMatrix(kron(np.diag([1.0, 0]), np.eye(4) / 4), (2, 2, 2))
    b = DensityMatrix(kron(np.diag([0, 1.0]), np.eye(4) / 4), (2, 2, 2))
    pvms = (angle_pvm(0.0),)
    with pytest.raises(MarginalMismatchError):
        RoutedModel(a, b, pvms, pvms, pvms)
    bad = random_routed_model(rng, corrupt_marginal=True)
    with pytest.raises(MarginalMismatchError):
        translate_routed_model(bad)


@pytest.mark.parametrize("seed", range(20))
def test_random_models(seed):
    m = random_routed_model(np.random.default_rng(seed))
    assert m.marginal_deviation() <= 1e-9
    r = check_equivalence(m)
    assert r.stat_deviation <= 1e-8
    assert r.entropy_deviation <= 1e-7
    assert r.passed


def test_three_outcome_tester():
    rng = np.random.default_rng(5)
    m = random_routed_model(rng, n_outputs=3)
    assert check_equivalence(m).passed
