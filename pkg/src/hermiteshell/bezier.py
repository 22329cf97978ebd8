"""Bernstein-form patches: conversion from Hermite data, evaluation, subdivision.

The Bernstein form exposes the convex-hull property (the surface lies inside
the axis-aligned bounding box of its 16 control points), which drives the
interval pruning used by the intersection queries.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateSplitError, DomainError
from .hermite import HermitePatch, ParamRect, UNIT_RECT

# Cubic Hermite (value0, value1, slope0, slope1) -> Bezier control ordinates.
_HERMITE_TO_BEZIER = np.array([
    [1.0, 0.0, 0.0, 0.0],
    [1.0, 0.0, 1.0 / 3.0, 0.0],
    [0.0, 1.0, 0.0, -1.0 / 3.0],
    [0.0, 1.0, 0.0, 0.0],
])


def bernstein_row(u, order=0):
    """The four degree-3 Bernstein polynomials (or a derivative) at ``u``."""
    u = np.asarray(u, dtype=float)
    v = 1.0 - u
    if order == 0:
        return np.stack([v**3, 3.0 * u * v**2, 3.0 * u**2 * v, u**3])
    if order == 1:
        return np.stack([-3.0 * v**2, 3.0 * v**2 - 6.0 * u * v,
                         6.0 * u * v - 3.0 * u**2, 3.0 * u**2])
    raise ValueError(f"unsupported derivative order {order}")


class BezierPatch:
    """A bicubic Bernstein patch covering ``rect`` in global parameter space."""

    def __init__(self, points, rect: ParamRect = UNIT_RECT):
        points = np.asarray(points, dtype=float)
        if points.shape != (4, 4, 3):
            raise DomainError(f"control net must be (4,4,3), got {points.shape}")
        self.p = points
        self.rect = rect

    def eval_local(self, u, v) -> np.ndarray:
        """Evaluate at local coordinates (u, v) in [0, 1]; broadcasts."""
        bu = bernstein_row(u)
        bv = bernstein_row(v)
        return np.einsum("i...,j...,ijc->...c", bu, bv, self.p)

    def derivs_local(self, u, v):
        """Local-parameter first derivatives (d/du, d/dv)."""
        bu, dbu = bernstein_row(u), bernstein_row(u, 1)
        bv, dbv = bernstein_row(v), bernstein_row(v, 1)
        du = np.einsum("i...,j...,ijc->...c", dbu, bv, self.p)
        dv = np.einsum("i...,j...,ijc->...c", bu, dbv, self.p)
        return du, dv

    def eval_global(self, xi1, xi2) -> np.ndarray:
        u, v = self.rect.to_local(xi1, xi2)
        return self.eval_local(u, v)

    def aabb(self):
        flat = self.p.reshape(-1, 3)
        return flat.min(axis=0), flat.max(axis=0)

    def max_extent(self) -> float:
        return max(self.rect.d_xi1, self.rect.d_xi2)


def to_bezier(patch: HermitePatch) -> BezierPatch:
    """Convert a Hermite patch to its equivalent Bernstein control net."""
    k = _HERMITE_TO_BEZIER
    points = np.einsum("ia,jb,abc->ijc", k, k, patch._coeff)
    return BezierPatch(points, patch.rect)


def _split_axis0(points, u):
    """De Casteljau split of the control net along axis 0 at local ``u``."""
    b0 = points
    b1 = (1.0 - u) * b0[:-1] + u * b0[1:]
    b2 = (1.0 - u) * b1[:-1] + u * b1[1:]
    b3 = (1.0 - u) * b2[:-1] + u * b2[1:]
    left = np.stack([b0[0], b1[0], b2[0], b3[0]])
    right = np.stack([b3[0], b2[1], b1[2], b0[3]])
    return left, right


def _split_net(points, axis, u):
    if axis == 0:
        return _split_axis0(points, u)
    left, right = _split_axis0(np.swapaxes(points, 0, 1), u)
    return np.swapaxes(left, 0, 1), np.swapaxes(right, 0, 1)


def decasteljau_split(bez: BezierPatch, u: float, v: float):
    """Split into 4 children at interior local coordinates (u, v).

    Children are returned as ((lo-u, lo-v), (hi-u, lo-v), (lo-u, hi-v),
    (hi-u, hi-v)); their rectangles partition the parent rectangle.
    """
    if not (0.0 < u < 1.0 and 0.0 < v < 1.0):
        raise DegenerateSplitError(f"split parameters ({u}, {v}) must be interior")
    r = bez.rect
    xi1_mid = r.xi1_min + u * r.d_xi1
    xi2_mid = r.xi2_min + v * r.d_xi2
    left, right = _split_net(bez.p, 0, u)
    children = []
    for net_u, (u0, u1) in ((left, (r.xi1_min, xi1_mid)), (right, (xi1_mid, r.xi1_max))):
        lo, hi = _split_net(net_u, 1, v)
        children.append((net_u, lo, hi, u0, u1))
    out = []
    for net_u, lo, hi, u0, u1 in children:
        out.append(BezierPatch(lo, ParamRect(u0, u1, r.xi2_min, xi2_mid)))
        out.append(BezierPatch(hi, ParamRect(u0, u1, xi2_mid, r.xi2_max)))
    # order: (lo,lo), (lo,hi), (hi,lo), (hi,hi)
    return [out[0], out[2], out[1], out[3]]


def subpatch(bez: BezierPatch, u0: float, u1: float, v0: float, v1: float) -> BezierPatch:
    """Extract the sub-patch covering local [u0, u1] x [v0, v1]."""
    if not (0.0 <= u0 < u1 <= 1.0 and 0.0 <= v0 < v1 <= 1.0):
        raise DomainError(f"invalid sub-rectangle [{u0},{u1}]x[{v0},{v1}]")
    net = bez.p
    if u0 > 0.0:
        net = _split_net(net, 0, u0)[1]
    ru = (u1 - u0) / (1.0 - u0)
    if ru < 1.0:
        net = _split_net(net, 0, ru)[0]
    if v0 > 0.0:
        net = _split_net(net, 1, v0)[1]
    rv = (v1 - v0) / (1.0 - v0)
    if rv < 1.0:
        net = _split_net(net, 1, rv)[0]
    r = bez.rect
    rect = ParamRect(r.xi1_min + u0 * r.d_xi1, r.xi1_min + u1 * r.d_xi1,
                     r.xi2_min + v0 * r.d_xi2, r.xi2_min + v1 * r.d_xi2)
    return BezierPatch(net, rect)


def split_excluding_neighborhood(bez: BezierPatch, center, radius: float):
    """Tile the patch minus an open box around ``center`` (local coords).

    The four returned rectangles form a pinwheel around the excluded
    axis-aligned neighborhood, clamped to the patch.  Returns an empty list
    when the neighborhood covers the whole patch.
    """
    u, v = center
    if not (0.0 < u < 1.0 and 0.0 < v < 1.0):
        raise DomainError(f"exclusion center ({u}, {v}) must be interior")
    if radius <= 0.0:
        raise DomainError("exclusion radius must be positive")
    bu0, bu1 = max(0.0, u - radius), min(1.0, u + radius)
    bv0, bv1 = max(0.0, v - radius), min(1.0, v + radius)
    regions = [
        (0.0, bu0, bv0, 1.0),
        (bu0, 1.0, bv1, 1.0),
        (0.0, bu1, 0.0, bv0),
        (bu1, 1.0, 0.0, bv1),
    ]
    out = []
    for (r0, r1, s0, s1) in regions:
        if r1 - r0 > 1e-14 and s1 - s0 > 1e-14:
            out.append(subpatch(bez, r0, r1, s0, s1))
    return out
