"""Reduction of local Hamiltonians to planar 2-local lattice Hamiltonians."""

import os as _os

# HAMLOWER_THREADS caps BLAS threads; it only takes effect before numpy loads
_threads = _os.environ.get("HAMLOWER_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

from .errors import HamlowerError  # noqa: E402
from .pauli import Hamiltonian, PauliString, multiply  # noqa: E402

__version__ = "0.1.0"

__all__ = ["Hamiltonian", "PauliString", "HamlowerError", "multiply", "__version__"]
