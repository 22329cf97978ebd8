"""Bicubic Hermite patches: cubic basis, evaluation, frames, shape functions, grids.

A patch interpolates positions from four corner nodes, each carrying four
generalized coordinates: the position, the two first parametric derivatives,
and the mixed second derivative.  Nodal derivatives are stored with respect
to the global parameters (xi1, xi2); the unit-interval basis weights for
derivative kinds are therefore scaled by the parametric extents of the patch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SingularFrameError

# Kind indices for the four generalized coordinates stored per node.
KIND_VALUE, KIND_D1, KIND_D2, KIND_D12 = 0, 1, 2, 3


def basis(kind: str, theta: float) -> float:
    """Evaluate one cubic Hermite basis function on the unit interval.

    ``kind`` is one of ``"f"``, ``"g"``, ``"f'"``, ``"g'"``.
    """
    t = float(theta)
    if not (0.0 <= t <= 1.0):
        raise DomainError(f"theta={theta} outside [0, 1]")
    if kind == "f":
        return 2.0 * t**3 - 3.0 * t**2 + 1.0
    if kind == "g":
        return t**3 - 2.0 * t**2 + t
    if kind == "f'":
        return 6.0 * t**2 - 6.0 * t
    if kind == "g'":
        return 3.0 * t**2 - 4.0 * t + 1.0
    raise DomainError(f"unknown basis kind {kind!r}")


def _basis_row(theta, order):
    """Weights for the 4 one-dimensional basis functions at ``theta``.

    Index layout: 0 -> value at node 0, 1 -> value at node 1,
    2 -> slope at node 0, 3 -> slope at node 1 (slopes w.r.t. theta).
    ``order`` selects the 0th/1st/2nd derivative in theta.
    """
    t = np.asarray(theta, dtype=float)
    u = 1.0 - t
    if order == 0:
        return np.stack([
            2.0 * t**3 - 3.0 * t**2 + 1.0,
            2.0 * u**3 - 3.0 * u**2 + 1.0,
            t**3 - 2.0 * t**2 + t,
            -(u**3 - 2.0 * u**2 + u),
        ])
    if order == 1:
        return np.stack([
            6.0 * t**2 - 6.0 * t,
            -(6.0 * u**2 - 6.0 * u),
            3.0 * t**2 - 4.0 * t + 1.0,
            3.0 * u**2 - 4.0 * u + 1.0,
        ])
    if order == 2:
        return np.stack([
            12.0 * t - 6.0,
            12.0 * u - 6.0,
            6.0 * t - 4.0,
            -(6.0 * u - 4.0),
        ])
    raise ValueError(f"unsupported derivative order {order}")


@dataclass(frozen=True)
class ParamRect:
    """Axis-aligned rectangle in (xi1, xi2) parameter space."""

    xi1_min: float
    xi1_max: float
    xi2_min: float
    xi2_max: float

    def __post_init__(self):
        if not (self.xi1_max > self.xi1_min and self.xi2_max > self.xi2_min):
            raise DomainError(f"empty parameter rectangle {self}")

    @property
    def d_xi1(self) -> float:
        return self.xi1_max - self.xi1_min

    @property
    def d_xi2(self) -> float:
        return self.xi2_max - self.xi2_min

    def contains(self, xi1, xi2, tol=0.0) -> bool:
        return (self.xi1_min - tol <= xi1 <= self.xi1_max + tol
                and self.xi2_min - tol <= xi2 <= self.xi2_max + tol)

    def to_local(self, xi1, xi2):
        """Map global parameters to unit-interval coordinates."""
        return ((np.asarray(xi1) - self.xi1_min) / self.d_xi1,
                (np.asarray(xi2) - self.xi2_min) / self.d_xi2)

    def center(self):
        return (0.5 * (self.xi1_min + self.xi1_max),
                0.5 * (self.xi2_min + self.xi2_max))

    def extents(self):
        return self.d_xi1, self.d_xi2


UNIT_RECT = ParamRect(0.0, 1.0, 0.0, 1.0)


@dataclass(frozen=True)
class NodeDofs:
    """The four generalized coordinate vectors stored at one node."""

    value: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d12: np.ndarray

    def __post_init__(self):
        for name in ("value", "d1", "d2", "d12"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,) or not np.all(np.isfinite(v)):
                raise DomainError(f"NodeDofs.{name} must be a finite 3-vector")
            object.__setattr__(self, name, v)

    def as_matrix(self) -> np.ndarray:
        """Rows ordered (value, d1, d2, d12)."""
        return np.stack([self.value, self.d1, self.d2, self.d12])


@dataclass(frozen=True)
class SurfaceFrame:
    """Pointwise tangents, unit normal, and second parametric derivatives."""

    a1: np.ndarray
    a2: np.ndarray
    a3: np.ndarray
    a11: np.ndarray
    a12: np.ndarray
    a22: np.ndarray

    @property
    def cross_norm(self) -> float:
        return float(np.linalg.norm(np.cross(self.a1, self.a2)))


class HermitePatch:
    """One rectangular bicubic Hermite element.

    ``dofs`` is a (2, 2, 4, 3) array indexed by corner (p, q) and kind
    (value, d1, d2, d12).  Corner (p, q) sits at parameter
    (xi1_min + p * d_xi1, xi2_min + q * d_xi2).
    """

    def __init__(self, dofs, rect: ParamRect = UNIT_RECT):
        dofs = np.asarray(dofs, dtype=float)
        if dofs.shape != (2, 2, 4, 3):
            raise DomainError(f"patch dofs must be (2,2,4,3), got {dofs.shape}")
        if not np.all(np.isfinite(dofs)):
            raise DomainError("patch dofs must be finite")
        self.dofs = dofs
        self.rect = rect
        # Local coefficient matrix Y[a, b]: dir-1 basis index a = p + 2r with
        # derivative kinds pre-scaled by the parametric extents, so that
        # x(theta1, theta2) = sum_ab w_a(theta1) w_b(theta2) Y[a, b].
        dx1, dx2 = rect.d_xi1, rect.d_xi2
        y = np.empty((4, 4, 3))
        for p in range(2):
            for r in range(2):
                for q in range(2):
                    for s in range(2):
                        y[p + 2 * r, q + 2 * s] = dofs[p, q, r + 2 * s] * dx1**r * dx2**s
        self._coeff = y

    @classmethod
    def from_nodes(cls, nodes, rect: ParamRect = UNIT_RECT) -> "HermitePatch":
        """Build from a 2x2 nested sequence of NodeDofs."""
        dofs = np.empty((2, 2, 4, 3))
        for p in range(2):
            for q in range(2):
                dofs[p, q] = nodes[p][q].as_matrix()
        return cls(dofs, rect)

    def node(self, p: int, q: int) -> NodeDofs:
        d = self.dofs[p, q]
        return NodeDofs(d[0], d[1], d[2], d[3])

    def _thetas(self, xi1, xi2, check=True):
        if check and not self.rect.contains(xi1, xi2):
            raise DomainError(f"({xi1}, {xi2}) outside patch rect {self.rect}")
        return self.rect.to_local(xi1, xi2)

    def eval_point(self, xi1, xi2) -> np.ndarray:
        """Surface position at global parameters (xi1, xi2)."""
        t1, t2 = self._thetas(xi1, xi2)
        w1 = _basis_row(t1, 0)
        w2 = _basis_row(t2, 0)
        return np.einsum("a...,b...,abc->...c", w1, w2, self._coeff)

    def eval_derivatives(self, xi1, xi2):
        """First and second parametric derivatives (a1, a2, a11, a12, a22)."""
        t1, t2 = self._thetas(xi1, xi2)
        dx1, dx2 = self.rect.d_xi1, self.rect.d_xi2
        rows1 = [_basis_row(t1, k) / dx1**k for k in range(3)]
        rows2 = [_basis_row(t2, k) / dx2**k for k in range(3)]

        def term(o1, o2):
            return np.einsum("a...,b...,abc->...c", rows1[o1], rows2[o2], self._coeff)

        return term(1, 0), term(0, 1), term(2, 0), term(1, 1), term(0, 2)

    def eval_frame(self, xi1, xi2, tol: float = 1e-12) -> SurfaceFrame:
        """Tangents, unit normal, and second derivatives at a point."""
        a1, a2, a11, a12, a22 = self.eval_derivatives(xi1, xi2)
        cr = np.cross(a1, a2)
        n = np.linalg.norm(cr)
        if n < tol * np.linalg.norm(a1) * np.linalg.norm(a2):
            raise SingularFrameError(f"degenerate tangents at ({xi1}, {xi2})")
        return SurfaceFrame(a1, a2, cr / n, a11, a12, a22)


@dataclass(frozen=True)
class ShapeEval:
    """The 16 shape functions supported on one patch, with derivatives.

    ``dphi`` columns are (d/dxi1, d/dxi2); ``ddphi`` columns are
    (d2/dxi1^2, d2/dxi1 dxi2, d2/dxi2^2).  ``indices`` holds the global
    scalar-DoF index of each entry.
    """

    phi: np.ndarray
    dphi: np.ndarray
    ddphi: np.ndarray
    indices: np.ndarray


def shape_rows(rect: ParamRect, xi1, xi2):
    """Shape-function rows (phi, dphi, ddphi) for one parameter point."""
    t1 = (xi1 - rect.xi1_min) / rect.d_xi1
    t2 = (xi2 - rect.xi2_min) / rect.d_xi2
    if not (0.0 <= t1 <= 1.0 and 0.0 <= t2 <= 1.0):
        raise DomainError(f"({xi1}, {xi2}) outside rect {rect}")
    dx1, dx2 = rect.d_xi1, rect.d_xi2
    # Direction rows carry the extent scaling of the stored xi-derivatives:
    # derivative kinds (a >= 2) are multiplied by the extent, and each
    # xi-derivative of the row divides by it.
    scale1 = np.array([1.0, 1.0, dx1, dx1])
    scale2 = np.array([1.0, 1.0, dx2, dx2])
    r1 = [scale1 * _basis_row(t1, k) / dx1**k for k in range(3)]
    r2 = [scale2 * _basis_row(t2, k) / dx2**k for k in range(3)]
    phi = np.outer(r1[0], r2[0]).ravel()
    dphi = np.stack([np.outer(r1[1], r2[0]).ravel(),
                     np.outer(r1[0], r2[1]).ravel()], axis=1)
    ddphi = np.stack([np.outer(r1[2], r2[0]).ravel(),
                      np.outer(r1[1], r2[1]).ravel(),
                      np.outer(r1[0], r2[2]).ravel()], axis=1)
    return phi, dphi, ddphi


# Node corner (p, q) and kind k of local dof l = 4 * (p + 2r) + (q + 2s).
_LOCAL_P = np.array([(l // 4) % 2 for l in range(16)])
_LOCAL_Q = np.array([l % 4 % 2 for l in range(16)])
_LOCAL_K = np.array([(l // 4) // 2 + 2 * (l % 4 // 2) for l in range(16)])


class PatchGrid:
    """A rectangular arrangement of patches sharing nodes.

    Patch (px, py) covers the unit parameter cell [px, px+1] x [py, py+1].
    Under periodic identification the wrapped column/row of nodes is folded
    onto its owner, so every generalized coordinate has exactly one owner.
    """

    def __init__(self, nx: int, ny: int, periodic_u: bool = False, periodic_v: bool = False):
        if nx < 1 or ny < 1:
            raise DomainError("grid needs at least one patch per direction")
        if (periodic_u and nx < 2) or (periodic_v and ny < 2):
            raise DomainError("periodic direction needs at least two patches")
        self.nx = nx
        self.ny = ny
        self.periodic_u = periodic_u
        self.periodic_v = periodic_v
        self.nnx = nx if periodic_u else nx + 1
        self.nny = ny if periodic_v else ny + 1
        self.n_nodes = self.nnx * self.nny
        self.n_dofs = 4 * self.n_nodes          # vector-valued DoFs
        self.n_patches = nx * ny
        self._gather = self._build_gather()

    def node_index(self, ix: int, iy: int) -> int:
        if self.periodic_u:
            ix %= self.nx
        if self.periodic_v:
            iy %= self.ny
        if not (0 <= ix < self.nnx and 0 <= iy < self.nny):
            raise DomainError(f"node ({ix}, {iy}) outside grid")
        return iy * self.nnx + ix

    def dof_index(self, ix: int, iy: int, kind: int) -> int:
        """Global scalar-DoF index of one (node, kind) pair."""
        return self.node_index(ix, iy) * 4 + kind

    def patch_index(self, px: int, py: int) -> int:
        if not (0 <= px < self.nx and 0 <= py < self.ny):
            raise DomainError(f"patch ({px}, {py}) outside grid")
        return py * self.nx + px

    def patch_cell(self, pid: int):
        return pid % self.nx, pid // self.nx

    def patch_rect(self, pid: int) -> ParamRect:
        px, py = self.patch_cell(pid)
        return ParamRect(float(px), float(px + 1), float(py), float(py + 1))

    def _build_gather(self):
        g = np.empty((self.n_patches, 16), dtype=np.int64)
        for pid in range(self.n_patches):
            px, py = self.patch_cell(pid)
            for l in range(16):
                p, q, k = _LOCAL_P[l], _LOCAL_Q[l], _LOCAL_K[l]
                g[pid, l] = self.dof_index(px + p, py + q, k)
        return g

    @property
    def gather(self) -> np.ndarray:
        """(n_patches, 16) map from local dof to global scalar-DoF index."""
        return self._gather

    def locate(self, xi1: float, xi2: float):
        """Patch id containing a global parameter point."""
        eps = 1e-12
        if not (-eps <= xi1 <= self.nx + eps and -eps <= xi2 <= self.ny + eps):
            raise DomainError(f"({xi1}, {xi2}) outside the grid parameter domain")
        px = min(int(np.floor(min(max(xi1, 0.0), self.nx - eps))), self.nx - 1)
        py = min(int(np.floor(min(max(xi2, 0.0), self.ny - eps))), self.ny - 1)
        return self.patch_index(px, py)

    def patch_from_config(self, q: np.ndarray, pid: int) -> HermitePatch:
        """Extract one HermitePatch from a flat configuration vector."""
        qb = q.reshape(-1, 3)
        dofs = np.empty((2, 2, 4, 3))
        px, py = self.patch_cell(pid)
        for p in range(2):
            for qq in range(2):
                base = self.node_index(px + p, py + qq) * 4
                dofs[p, qq] = qb[base:base + 4]
        return HermitePatch(dofs, self.patch_rect(pid))

    def gather_patches(self, q: np.ndarray) -> np.ndarray:
        """(n_patches, 16, 3) per-patch local dof values."""
        return q.reshape(-1, 3)[self._gather]


def shape_eval(grid: PatchGrid, patch_id: int, xi1: float, xi2: float) -> ShapeEval:
    """Shape functions of the patch containing (xi1, xi2), with global indices."""
    rect = grid.patch_rect(patch_id)
    phi, dphi, ddphi = shape_rows(rect, xi1, xi2)
    return ShapeEval(phi, dphi, ddphi, grid.gather[patch_id].copy())


def flat_sheet(nx, ny, length, width, z=0.0):
    """Grid plus configuration for a flat rectangular sheet in the z-plane.

    Returns (grid, q) with q a flat (3 * n_dofs,) vector.
    """
    grid = PatchGrid(nx, ny)
    dx, dy = length / nx, width / ny
    qb = np.zeros((grid.n_dofs, 3))
    for iy in range(grid.nny):
        for ix in range(grid.nnx):
            base = grid.node_index(ix, iy) * 4
            qb[base + KIND_VALUE] = (ix * dx, iy * dy, z)
            qb[base + KIND_D1] = (dx, 0.0, 0.0)
            qb[base + KIND_D2] = (0.0, dy, 0.0)
    return grid, qb.ravel()


def cylinder_sheet(nx, ny, radius, height):
    """Grid plus configuration for a cylinder of given radius and height.

    The azimuthal direction is xi1 and wraps periodically; the bicubic
    interpolation approximates the circular cross-section.
    """
    grid = PatchGrid(nx, ny, periodic_u=True)
    dphi = 2.0 * np.pi / nx
    dz = height / ny
    qb = np.zeros((grid.n_dofs, 3))
    for iy in range(grid.nny):
        for ix in range(grid.nnx):
            ang = ix * dphi
            base = grid.node_index(ix, iy) * 4
            qb[base + KIND_VALUE] = (radius * np.cos(ang), radius * np.sin(ang), iy * dz)
            qb[base + KIND_D1] = (-radius * np.sin(ang) * dphi, radius * np.cos(ang) * dphi, 0.0)
            qb[base + KIND_D2] = (0.0, 0.0, dz)
    return grid, qb.ravel()
