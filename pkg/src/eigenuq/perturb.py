"""Eigenspace perturbation engine.

Combines the pieces: eigenvalue perturbation through the barycentric
map, eigenvector alignment against the strain-rate frame, stress
recomposition, under-relaxation, and the production diagnostic.

Alignment convention. For a linear eddy-viscosity baseline the stress
anisotropy is proportional to the negative strain rate, so its largest
eigenvalue lives on the most compressive strain direction. The
unpermuted ("model-aligned") eigenvector choice therefore orders the
strain eigenvectors most-compressive-first; it maximizes turbulence
production for a given eigenvalue triple. The permuted choice reverses
the pairing and minimizes production. Both extremes match the
alignment_range endpoints.

All operations are pure; perturb_field is elementwise over cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import eig3, perturb_stress_batch
from .barycentric import (
    DEFAULT_GEOMETRY,
    ComponentTarget,
    TriangleGeometry,
    bary_from_eigenvalues,
    eigenvalues_from_bary,
    perturb_bary,
)
from .errors import (
    DegenerateTKE,
    InvalidFrame,
    InvalidMagnitude,
    NonFiniteError,
    OrderingError,
    ShapeError,
)
from .tensors import (
    K_FLOOR,
    AnisotropyEigenvalues,
    EigenFrame,
    SymTensor3,
    stress_from_eigen,
    symmetric_eigen,
)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a

# Critical eigenvector alignments relative to a reference frame: identity
# keeps the frame's own pairing, the reversal swaps the first and third
# axes. Both orthogonal with |det| = 1.
V_MAX = _readonly(np.eye(3))
V_MIN = _readonly(np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]]))

# Relative spread below which strain eigenvalues count as coincident and
# eigenvector alignment is meaningless.
DEGENERATE_STRAIN_SPREAD = 1.0e-12


@dataclass(frozen=True)
class PerturbationSpec:
    """One perturbed-run recipe: target state, alignment, magnitudes."""

    component: ComponentTarget
    permute: bool = False
    delta_b: float = 1.0
    urlx: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "component", ComponentTarget(self.component))
        object.__setattr__(self, "permute", bool(self.permute))
        for name in ("delta_b", "urlx"):
            value = float(getattr(self, name))
            if not 0.0 <= value <= 1.0:
                raise InvalidMagnitude(f"{name} must be in [0, 1], got {value}")
            object.__setattr__(self, name, value)


class StrainFrame(EigenFrame):
    """Eigenframe of a strain-rate tensor: descending rates, unit columns."""

    @property
    def is_degenerate(self) -> bool:
        vals = self.eigenvalues
        scale = max(1.0, max(abs(v) for v in vals))
        return (vals[0] - vals[2]) <= DEGENERATE_STRAIN_SPREAD * scale


def strain_rate(gradu) -> SymTensor3:
    """Symmetric part of a velocity-gradient tensor."""
    g = np.asarray(gradu, dtype=np.float64)
    if g.shape != (3, 3):
        raise ShapeError(f"velocity gradient must be (3, 3), got {g.shape}")
    if not np.all(np.isfinite(g)):
        raise NonFiniteError("velocity gradient has non-finite entries")
    return SymTensor3.from_matrix(0.5 * (g + g.T))


def strain_eigenframe(s: SymTensor3) -> StrainFrame:
    """Eigendecompose a strain-rate tensor into a StrainFrame."""
    vals, vecs = eig3(s.as_six())
    return StrainFrame(tuple(vals), vecs)


def boussinesq_stress(k: float, nu_t: float, s: SymTensor3) -> SymTensor3:
    """Linear eddy-viscosity stress: R = (2k/3) I - 2 nu_t S."""
    k = float(k)
    nu_t = float(nu_t)
    third = 2.0 * k / 3.0
    return SymTensor3(
        third - 2.0 * nu_t * s.xx,
        third - 2.0 * nu_t * s.yy,
        third - 2.0 * nu_t * s.zz,
        -2.0 * nu_t * s.xy,
        -2.0 * nu_t * s.xz,
        -2.0 * nu_t * s.yz,
    )


def model_alignment(strain: StrainFrame) -> np.ndarray:
    """Strain eigenvectors ordered for eddy-viscosity-consistent pairing.

    Columns run most-compressive to most-stretching, so pairing them
    with descending stress eigenvalues reproduces the baseline model's
    alignment (and maximizes production for the given eigenvalues).
    """
    return np.array(strain.eigenvectors[:, ::-1])


def perturb_eigenvalues(
    lam: AnisotropyEigenvalues,
    spec: PerturbationSpec,
    geometry: TriangleGeometry = DEFAULT_GEOMETRY,
) -> AnisotropyEigenvalues:
    """Move anisotropy eigenvalues toward the spec's limiting state.

    Composition through the triangle: map, straight-line perturbation,
    inverse map. delta_b = 1 lands exactly on the target vertex.
    """
    point = bary_from_eigenvalues(lam, geometry)
    moved = perturb_bary(point, spec.component, spec.delta_b, geometry)
    return eigenvalues_from_bary(moved, geometry)


def perturb_eigenvectors(frame, permute: bool) -> np.ndarray:
    """Apply the critical alignment to a reference frame's columns.

    permute=False keeps the frame's pairing (identity alignment);
    permute=True swaps the first and third columns (reversal).
    """
    f = np.asarray(frame, dtype=np.float64)
    if f.shape != (3, 3):
        raise ShapeError(f"frame must be (3, 3), got {f.shape}")
    dev = float(np.max(np.abs(f.T @ f - np.eye(3))))
    if dev > 1.0e-8:
        raise InvalidFrame(f"frame columns deviate from orthonormality by {dev:.3e}")
    return f @ (V_MIN if permute else V_MAX)


def alignment_range(lam, gamma) -> tuple[float, float]:
    """Extreme values of the eigenvalue-pairing inner product.

    Both triples must be descending; returns (min, max) over all
    eigenvector alignments: min pairs opposite ends, max pairs like
    ends. These are the production-relevant extremes (production is
    the negative of this product, scaled).
    """
    lv = lam.as_tuple() if isinstance(lam, AnisotropyEigenvalues) else tuple(
        float(v) for v in lam
    )
    gv = tuple(float(v) for v in gamma)
    if not (lv[0] >= lv[1] >= lv[2]):
        raise OrderingError(f"eigenvalue triple not descending: {lv}")
    if not (gv[0] >= gv[1] >= gv[2]):
        raise OrderingError(f"strain triple not descending: {gv}")
    lo = lv[0] * gv[2] + lv[1] * gv[1] + lv[2] * gv[0]
    hi = lv[0] * gv[0] + lv[1] * gv[1] + lv[2] * gv[2]
    return (lo, hi)


def perturbed_stress(
    k: float,
    spec: PerturbationSpec,
    baseline_b: SymTensor3,
    strain: SymTensor3,
    geometry: TriangleGeometry = DEFAULT_GEOMETRY,
) -> SymTensor3:
    """Assemble the perturbed stress: eigenvalues moved toward the target
    state, eigenvectors aligned against the strain frame, energy kept.

    Degenerate (near-isotropic) strain skips the alignment and keeps the
    baseline anisotropy's own eigenvectors.
    """
    k = float(k)
    if not math.isfinite(k):
        raise NonFiniteError(f"k is not finite: {k}")
    if k <= K_FLOOR:
        raise DegenerateTKE(f"turbulent kinetic energy {k:.3e} at or below floor")
    b_frame = symmetric_eigen(baseline_b)
    lam = AnisotropyEigenvalues(*b_frame.eigenvalues)
    lam_new = perturb_eigenvalues(lam, spec, geometry)
    s_frame = strain_eigenframe(strain)
    if s_frame.is_degenerate:
        vecs = np.array(b_frame.eigenvectors)
    else:
        vecs = perturb_eigenvectors(model_alignment(s_frame), spec.permute)
    return stress_from_eigen(k, lam_new, vecs)


def relax_stress(current: SymTensor3, target: SymTensor3, urlx: float) -> SymTensor3:
    """Under-relaxed step from current toward target stress."""
    urlx = float(urlx)
    if not 0.0 <= urlx <= 1.0:
        raise InvalidMagnitude(f"urlx must be in [0, 1], got {urlx}")
    if urlx == 1.0:
        return target
    c = current.as_six()
    t = target.as_six()
    return SymTensor3.from_six(c + urlx * (t - c))


def production(r: SymTensor3, gradu) -> float:
    """Turbulence production: negative full contraction of stress with
    the velocity gradient."""
    g = np.asarray(gradu, dtype=np.float64)
    if g.shape != (3, 3):
        raise ShapeError(f"velocity gradient must be (3, 3), got {g.shape}")
    return -(
        r.xx * g[0, 0]
        + r.yy * g[1, 1]
        + r.zz * g[2, 2]
        + r.xy * (g[0, 1] + g[1, 0])
        + r.xz * (g[0, 2] + g[2, 0])
        + r.yz * (g[1, 2] + g[2, 1])
    )


def perturb_field(r_field, gradu_field, k_field, spec: PerturbationSpec):
    """Apply the perturbation cell-wise over aligned fields.

    Cells whose kinetic energy is at or below the floor pass through
    unperturbed. Delegates to the batch kernel; equivalent to calling
    perturbed_stress per cell.
    """
    r_list = list(r_field)
    g = np.asarray(list(gradu_field), dtype=np.float64)
    k = np.asarray(list(k_field), dtype=np.float64)
    n = len(r_list)
    if n == 0 and g.size == 0 and k.size == 0:
        return []
    if g.shape != (n, 3, 3) or k.shape != (n,):
        raise ShapeError(
            f"field lengths disagree: {n} stresses, "
            f"{g.shape[0] if g.ndim == 3 else 'malformed'} gradients, "
            f"{k.shape[0] if k.ndim == 1 else 'malformed'} energies"
        )
    r6 = np.array([r.as_six() for r in r_list])
    if not (np.all(np.isfinite(g)) and np.all(np.isfinite(k))):
        raise NonFiniteError("field inputs contain non-finite entries")
    out = perturb_stress_batch(
        r6, g, k, int(spec.component), spec.permute, spec.delta_b, K_FLOOR
    )
    return [SymTensor3.from_six(row) for row in out]
