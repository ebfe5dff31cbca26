"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; the pure
numpy module is the fallback and the reference. Setting EIGENUQ_PURE=1
in the environment forces the fallback, which the equivalence tests and
the benchmark use to compare both.
"""

import os

from . import pure
from .pure import VERTEX_EIGENVALUES, mat_to_six, six_to_mat

if os.environ.get("EIGENUQ_PURE", "") == "1":
    _impl = pure
else:
    try:
        from . import _fast as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = pure

BACKEND = _impl.NAME
eig3 = _impl.eig3
perturb_stress_batch = _impl.perturb_stress_batch

__all__ = [
    "BACKEND",
    "VERTEX_EIGENVALUES",
    "eig3",
    "mat_to_six",
    "perturb_stress_batch",
    "six_to_mat",
]
