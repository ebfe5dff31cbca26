"""Symmetric 3x3 tensor algebra for Reynolds-stress work.

Value types are frozen and validated on construction; operations are
pure functions on those values, so every entry point here is safe to
call from any number of threads.

Component order throughout: (xx, yy, zz, xy, xz, yz).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import eig3
from .errors import (
    DegenerateTKE,
    InvalidFrame,
    InvalidMagnitude,
    NonFiniteError,
    OrderingError,
    RealizabilityError,
    ShapeError,
)

# Below this turbulent kinetic energy the anisotropy is undefined and
# callers treat the state as isotropic (mirrors near-wall k -> 0).
K_FLOOR = 1.0e-10

ORTHONORMAL_TOL = 1.0e-10    # EigenFrame construction invariant
FRAME_INPUT_TOL = 1.0e-8     # looser gate for caller-supplied frames
TRACE_FREE_TOL = 1.0e-10
RANGE_SLACK = 1.0e-10
REALIZABILITY_SLACK = 1.0e-9


@dataclass(frozen=True)
class SymTensor3:
    """Symmetric 3x3 tensor stored as its six independent components."""

    xx: float
    yy: float
    zz: float
    xy: float = 0.0
    xz: float = 0.0
    yz: float = 0.0

    def __post_init__(self):
        for name in ("xx", "yy", "zz", "xy", "xz", "yz"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise NonFiniteError(f"component {name} is not finite: {value}")
            object.__setattr__(self, name, value)

    @classmethod
    def from_matrix(cls, m) -> "SymTensor3":
        m = np.asarray(m, dtype=np.float64)
        if m.shape != (3, 3):
            raise ShapeError(f"expected a (3, 3) matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise NonFiniteError("matrix has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(m))))
        if float(np.max(np.abs(m - m.T))) > 1.0e-6 * scale:
            raise ValueError("matrix is not symmetric")
        s = 0.5 * (m + m.T)
        return cls(s[0, 0], s[1, 1], s[2, 2], s[0, 1], s[0, 2], s[1, 2])

    @classmethod
    def from_six(cls, six) -> "SymTensor3":
        six = np.asarray(six, dtype=np.float64)
        if six.shape != (6,):
            raise ShapeError(f"expected six components, got shape {six.shape}")
        return cls(*six)

    def as_matrix(self) -> np.ndarray:
        return np.array(
            [
                [self.xx, self.xy, self.xz],
                [self.xy, self.yy, self.yz],
                [self.xz, self.yz, self.zz],
            ]
        )

    def as_six(self) -> np.ndarray:
        return np.array([self.xx, self.yy, self.zz, self.xy, self.xz, self.yz])

    def trace(self) -> float:
        return self.xx + self.yy + self.zz


@dataclass(frozen=True, eq=False)
class EigenFrame:
    """Descending eigenvalues paired with orthonormal eigenvector columns."""

    eigenvalues: tuple[float, float, float]
    eigenvectors: np.ndarray

    def __post_init__(self):
        vals = tuple(float(v) for v in self.eigenvalues)
        if len(vals) != 3:
            raise ShapeError("expected exactly three eigenvalues")
        if not all(math.isfinite(v) for v in vals):
            raise NonFiniteError(f"non-finite eigenvalues: {vals}")
        if not (vals[0] >= vals[1] >= vals[2]):
            raise OrderingError(f"eigenvalues not in descending order: {vals}")
        vecs = np.array(self.eigenvectors, dtype=np.float64)
        if vecs.shape != (3, 3):
            raise ShapeError(f"eigenvector matrix must be (3, 3), got {vecs.shape}")
        dev = float(np.max(np.abs(vecs.T @ vecs - np.eye(3))))
        if dev > ORTHONORMAL_TOL:
            raise InvalidFrame(
                f"eigenvector columns deviate from orthonormality by {dev:.3e}"
            )
        vecs.flags.writeable = False
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "eigenvectors", vecs)

    def reconstruct(self) -> SymTensor3:
        v = self.eigenvectors
        m = (v * np.asarray(self.eigenvalues)) @ v.T
        return SymTensor3.from_matrix(m)


@dataclass(frozen=True)
class AnisotropyEigenvalues:
    """Realizable, trace-free anisotropy eigenvalue triple (descending)."""

    l1: float
    l2: float
    l3: float

    def __post_init__(self):
        vals = (float(self.l1), float(self.l2), float(self.l3))
        if not all(math.isfinite(v) for v in vals):
            raise NonFiniteError(f"non-finite eigenvalues: {vals}")
        if not (vals[0] >= vals[1] >= vals[2]):
            raise OrderingError(f"eigenvalues not in descending order: {vals}")
        if abs(sum(vals)) > TRACE_FREE_TOL:
            raise RealizabilityError(f"eigenvalues not trace-free: sum={sum(vals):.3e}")
        if vals[0] > 2.0 / 3.0 + RANGE_SLACK or vals[2] < -1.0 / 3.0 - RANGE_SLACK:
            raise RealizabilityError(
                f"eigenvalues outside [-1/3, 2/3]: {vals}"
            )
        for name, v in zip(("l1", "l2", "l3"), vals):
            object.__setattr__(self, name, v)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.l1, self.l2, self.l3)

    def as_array(self) -> np.ndarray:
        return np.array([self.l1, self.l2, self.l3])


@dataclass(frozen=True)
class RealizabilityReport:
    """Diagnostics from realizability_check; a pure query result."""

    k: float
    k_nonnegative: bool
    eigenvalues: tuple[float, float, float]
    eigenvalues_in_range: bool
    weights: tuple[float, float, float]
    inside_triangle: bool
    realizable: bool
    vertex: str | None


def symmetric_eigen(t: SymTensor3) -> EigenFrame:
    """Eigendecompose a symmetric tensor into a descending EigenFrame.

    Deterministic: degenerate subspaces get a canonical basis and every
    eigenvector column is sign-fixed (largest-magnitude entry positive).
    """
    vals, vecs = eig3(t.as_six())
    return EigenFrame(tuple(vals), vecs)


def turbulent_kinetic_energy(r: SymTensor3) -> float:
    """Half the trace of the stress tensor."""
    return 0.5 * r.trace()


def anisotropy_from_stress(r: SymTensor3) -> tuple[float, SymTensor3]:
    """Split a stress tensor into (k, b) with b = R/(2k) - I/3.

    Raises DegenerateTKE when k <= K_FLOOR; the caller then treats the
    state as isotropic (b = 0) instead.
    """
    k = turbulent_kinetic_energy(r)
    if k <= K_FLOOR:
        raise DegenerateTKE(f"turbulent kinetic energy {k:.3e} at or below floor")
    third = 1.0 / 3.0
    return k, SymTensor3(
        r.xx / (2.0 * k) - third,
        r.yy / (2.0 * k) - third,
        r.zz / (2.0 * k) - third,
        r.xy / (2.0 * k),
        r.xz / (2.0 * k),
        r.yz / (2.0 * k),
    )


def stress_from_eigen(k: float, lam, v) -> SymTensor3:
    """Recompose a stress tensor: R = 2k (V diag(lam) V^T + I/3)."""
    k = float(k)
    if not math.isfinite(k):
        raise NonFiniteError(f"k is not finite: {k}")
    if k < 0.0:
        raise InvalidMagnitude(f"k must be nonnegative, got {k}")
    if not isinstance(lam, AnisotropyEigenvalues):
        lam = AnisotropyEigenvalues(*lam)
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (3, 3):
        raise ShapeError(f"eigenvector matrix must be (3, 3), got {v.shape}")
    dev = float(np.max(np.abs(v.T @ v - np.eye(3))))
    if dev > FRAME_INPUT_TOL:
        raise InvalidFrame(
            f"eigenvector columns deviate from orthonormality by {dev:.3e}"
        )
    m = (v * lam.as_array()) @ v.T + np.eye(3) / 3.0
    return SymTensor3.from_matrix(2.0 * k * m)


def _triangle_weights_from_eigenvalues(vals) -> tuple[float, float, float]:
    l1, l2, l3 = vals
    return (l1 - l2, 2.0 * (l2 - l3), 3.0 * l3 + 1.0)


def realizability_check(r: SymTensor3) -> RealizabilityReport:
    """Diagnose whether a stress tensor is a realizable turbulence state.

    Checks k >= 0, anisotropy eigenvalues within [-1/3, 2/3], and
    membership of the barycentric triangle (boundary counts as inside).
    States with k below K_FLOOR are reported as isotropic.
    """
    k = turbulent_kinetic_energy(r)
    k_ok = k >= -REALIZABILITY_SLACK
    if k <= K_FLOOR:
        vals = (0.0, 0.0, 0.0)
    else:
        _, b = anisotropy_from_stress(r)
        raw, _ = eig3(b.as_six())
        vals = (float(raw[0]), float(raw[1]), float(raw[2]))
    in_range = (
        vals[0] <= 2.0 / 3.0 + REALIZABILITY_SLACK
        and vals[2] >= -1.0 / 3.0 - REALIZABILITY_SLACK
    )
    weights = _triangle_weights_from_eigenvalues(vals)
    inside = all(w >= -REALIZABILITY_SLACK for w in weights)
    vertex = None
    for name, pattern in (("1c", 0), ("2c", 1), ("3c", 2)):
        if all(
            abs(w - (1.0 if i == pattern else 0.0)) <= REALIZABILITY_SLACK
            for i, w in enumerate(weights)
        ):
            vertex = name
            break
    return RealizabilityReport(
        k=k,
        k_nonnegative=k_ok,
        eigenvalues=vals,
        eigenvalues_in_range=in_range,
        weights=weights,
        inside_triangle=inside,
        realizable=bool(k_ok and in_range and inside),
        vertex=vertex,
    )
