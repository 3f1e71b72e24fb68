import numpy as np
import pytest

from di_kit.kernels import load_backend


def _backends():
    out = ["python"]
    try:
        load_backend("compiled")
    except ImportError:
        pass
    else:
        out.insert(0, "compiled")
    return out


BACKENDS = _backends()


@pytest.fixture(params=BACKENDS)
def backend(request):
    return load_backend(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_hermitian(d, rng):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (g + g.conj().T) / 2
