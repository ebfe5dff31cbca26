"""Barycentric triangle map for turbulence componentality.

An invertible affine map between trace-free anisotropy eigenvalue
triples and planar coordinates on a triangle whose vertices are the
one-, two-, and three-component limiting states. Any realizable state
is a convex combination of the vertices with weights

    w = (l1 - l2, 2(l2 - l3), 3*l3 + 1),   w1 + w2 + w3 = 1.

Perturbations toward a limiting state are straight-line interpolations
in these coordinates. All functions are pure and thread-safe.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import (
    GeometryError,
    InvalidMagnitude,
    NonFiniteError,
    RealizabilityError,
)
from .tensors import AnisotropyEigenvalues

WEIGHT_SLACK = 1.0e-10


@dataclass(frozen=True)
class BaryPoint:
    """Planar coordinates on the componentality triangle."""

    x: float
    y: float

    def __post_init__(self):
        for name in ("x", "y"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise NonFiniteError(f"coordinate {name} is not finite: {value}")
            object.__setattr__(self, name, value)


class ComponentTarget(enum.IntEnum):
    """Limiting componentality states, the triangle's vertices."""

    ONE_COMPONENT = 1
    TWO_COMPONENT = 2
    THREE_COMPONENT = 3

    @property
    def limit_eigenvalues(self) -> AnisotropyEigenvalues:
        if self is ComponentTarget.ONE_COMPONENT:
            return AnisotropyEigenvalues(2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0)
        if self is ComponentTarget.TWO_COMPONENT:
            return AnisotropyEigenvalues(1.0 / 6.0, 1.0 / 6.0, -1.0 / 3.0)
        return AnisotropyEigenvalues(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class TriangleGeometry:
    """Vertex placement of the componentality triangle."""

    x1c: BaryPoint
    x2c: BaryPoint
    x3c: BaryPoint

    def __post_init__(self):
        area2 = abs(
            (self.x1c.x - self.x3c.x) * (self.x2c.y - self.x3c.y)
            - (self.x2c.x - self.x3c.x) * (self.x1c.y - self.x3c.y)
        )
        scale = max(
            1e-300,
            max(abs(v.x) for v in (self.x1c, self.x2c, self.x3c))
            + max(abs(v.y) for v in (self.x1c, self.x2c, self.x3c)),
        )
        if area2 <= 1e-12 * scale * scale:
            raise GeometryError("triangle vertices are collinear")

    def vertex(self, target: ComponentTarget) -> BaryPoint:
        return (self.x1c, self.x2c, self.x3c)[int(target) - 1]


DEFAULT_GEOMETRY = TriangleGeometry(
    BaryPoint(1.0, 0.0),
    BaryPoint(0.0, 0.0),
    BaryPoint(0.5, math.sqrt(3.0) / 2.0),
)


def _weights_from_eigenvalues(vals) -> tuple[float, float, float]:
    l1, l2, l3 = (float(v) for v in vals)
    return (l1 - l2, 2.0 * (l2 - l3), 3.0 * l3 + 1.0)


def bary_from_eigenvalues(
    lam, geometry: TriangleGeometry = DEFAULT_GEOMETRY
) -> BaryPoint:
    """Map a trace-free eigenvalue triple onto the triangle.

    Accepts AnisotropyEigenvalues or a plain descending triple. Raises
    RealizabilityError naming the offending weight when the state falls
    outside the realizable triangle.
    """
    vals = lam.as_tuple() if isinstance(lam, AnisotropyEigenvalues) else tuple(lam)
    w = _weights_from_eigenvalues(vals)
    for i, wi in enumerate(w):
        if wi < -WEIGHT_SLACK:
            raise RealizabilityError(
                f"eigenvalues {vals} are not realizable: weight w{i + 1} = {wi:.6g}"
            )
    if abs(sum(w) - 1.0) > WEIGHT_SLACK:
        raise RealizabilityError(
            f"eigenvalues {vals} are not trace-free: weights sum to {sum(w):.12g}"
        )
    v1, v2, v3 = geometry.x1c, geometry.x2c, geometry.x3c
    return BaryPoint(
        w[0] * v1.x + w[1] * v2.x + w[2] * v3.x,
        w[0] * v1.y + w[1] * v2.y + w[2] * v3.y,
    )


def triangle_weights(
    point: BaryPoint, geometry: TriangleGeometry = DEFAULT_GEOMETRY
) -> tuple[float, float, float]:
    """Barycentric weights of a point; w1 + w2 + w3 = 1 exactly."""
    v1, v2, v3 = geometry.x1c, geometry.x2c, geometry.x3c
    a = v1.x - v3.x
    c = v2.x - v3.x
    b = v1.y - v3.y
    d = v2.y - v3.y
    det = a * d - b * c
    if det == 0.0:
        raise GeometryError("triangle vertices are collinear")
    e = point.x - v3.x
    f = point.y - v3.y
    w1 = (e * d - c * f) / det
    w2 = (a * f - b * e) / det
    return (w1, w2, 1.0 - w1 - w2)


def eigenvalues_from_bary(
    point: BaryPoint, geometry: TriangleGeometry = DEFAULT_GEOMETRY
) -> AnisotropyEigenvalues:
    """Invert the map: triangle coordinates back to eigenvalues.

    Points outside the triangle (any weight below -1e-10) raise
    RealizabilityError; boundary drift within the slack is absorbed.
    """
    w = triangle_weights(point, geometry)
    for i, wi in enumerate(w):
        if wi < -WEIGHT_SLACK:
            raise RealizabilityError(
                f"point ({point.x:.6g}, {point.y:.6g}) lies outside the "
                f"triangle: weight w{i + 1} = {wi:.6g}"
            )
    clamped = [max(wi, 0.0) for wi in w]
    total = sum(clamped)
    w1, w2, w3 = (wi / total for wi in clamped)
    l3 = (w3 - 1.0) / 3.0
    l2 = l3 + w2 / 2.0
    l1 = l2 + w1
    return AnisotropyEigenvalues(l1, l2, l3)


def perturb_bary(
    point: BaryPoint,
    target: ComponentTarget,
    delta_b: float,
    geometry: TriangleGeometry = DEFAULT_GEOMETRY,
) -> BaryPoint:
    """Move a state toward a limiting vertex: x* = x + delta_b (x_t - x).

    delta_b = 0 returns the point unchanged; delta_b = 1 returns the
    vertex itself; intermediate values stay inside the triangle.
    """
    delta_b = float(delta_b)
    if not 0.0 <= delta_b <= 1.0:
        raise InvalidMagnitude(f"delta_b must be in [0, 1], got {delta_b}")
    w = triangle_weights(point, geometry)
    for i, wi in enumerate(w):
        if wi < -WEIGHT_SLACK:
            raise RealizabilityError(
                f"point ({point.x:.6g}, {point.y:.6g}) lies outside the "
                f"triangle: weight w{i + 1} = {wi:.6g}"
            )
    vt = geometry.vertex(target)
    if delta_b == 0.0:
        return point
    if delta_b == 1.0:
        return vt
    return BaryPoint(
        point.x + delta_b * (vt.x - point.x),
        point.y + delta_b * (vt.y - point.y),
    )
