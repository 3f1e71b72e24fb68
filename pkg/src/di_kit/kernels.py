"""Backend selection for the numerical kernels.

The compiled extension ``di_kit._kernels`` is used when importable. Setting
the environment variable ``DI_KIT_PURE_PYTHON=1`` before import forces the
Python implementation in ``di_kit._pykernels``.
"""
import importlib
import os

__all__ = ["BACKEND", "eigh_hermitian", "schur_complement", "load_backend", "KernelNoConvergence"]


def load_backend(name):
    """Return the kernel module for ``"compiled"`` or ``"python"``."""
    if name == "compiled":
        return importlib.import_module("di_kit._kernels")
    if name == "python":
        return importlib.import_module("di_kit._pykernels")
    raise ValueError(f"unknown kernel backend {name!r}")


def _select():
    if os.environ.get("DI_KIT_PURE_PYTHON", "").strip() not in ("", "0"):
        return "python", load_backend("python")
    try:
        return "compiled", load_backend("compiled")
    except ImportError:
        return "python", load_backend("python")


BACKEND, _impl = _select()

eigh_hermitian = _impl.eigh_hermitian
schur_complement = _impl.schur_complement
KernelNoConvergence = _impl.KernelNoConvergence
