"""Kirchhoff-Love continuum quantities on Hermite patch grids.

Membrane strain is half the difference of first fundamental forms between the
deformed and reference midsurface, bending strain half the difference of the
second forms.  The elastic area density follows the St. Venant-Kirchhoff
model, contracted either in index notation or through the equivalent 3x3
Voigt matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DomainError
from .hermite import ParamRect, PatchGrid, SurfaceFrame, shape_rows

_SQRT30 = np.sqrt(30.0)
_GL4_OFFSETS = (0.5 * np.sqrt(3.0 / 7.0 - 2.0 / 7.0 * np.sqrt(6.0 / 5.0)),
                0.5 * np.sqrt(3.0 / 7.0 + 2.0 / 7.0 * np.sqrt(6.0 / 5.0)))
_GL4_WEIGHTS = ((18.0 + _SQRT30) / 72.0, (18.0 - _SQRT30) / 72.0)


@dataclass(frozen=True)
class Material:
    """Isotropic shell material; Lame parameters derive from (Y, nu)."""

    young: float
    poisson: float
    thickness: float
    density: float

    def __post_init__(self):
        if self.young <= 0.0:
            raise DomainError("Young's modulus must be positive")
        if not (0.0 <= self.poisson <= 0.5):
            raise DomainError("Poisson ratio must lie in [0, 0.5]")
        if self.thickness <= 0.0:
            raise DomainError("thickness must be positive")
        if self.density < 0.0:
            raise DomainError("density must be nonnegative")

    @property
    def lam(self) -> float:
        return self.young * self.poisson / (1.0 - self.poisson**2)

    @property
    def mu(self) -> float:
        return self.young / (2.0 * (1.0 + self.poisson))


@dataclass(frozen=True)
class QuadratureRule:
    """Tensor-product quadrature points (global parameters) and weights."""

    points: np.ndarray
    weights: np.ndarray


def gauss_legendre_16(rect: ParamRect) -> QuadratureRule:
    """The 4x4 Gauss-Legendre rule on a parameter rectangle.

    Line abscissae sit at the rectangle center offset by
    (extent/2) * sqrt(3/7 -+ (2/7) sqrt(6/5)); line weights are
    (18 +- sqrt(30)) * extent / 72.  Point weights are products of the two
    line weights, so the rule integrates tensor polynomials of degree <= 7
    per dimension exactly.
    """
    i_off, o_off = _GL4_OFFSETS
    w_in, w_out = _GL4_WEIGHTS
    xs, ws = [], []
    for (lo, ext) in ((rect.xi1_min, rect.d_xi1), (rect.xi2_min, rect.d_xi2)):
        c = lo + 0.5 * ext
        xs.append(np.array([c - o_off * ext, c - i_off * ext,
                            c + i_off * ext, c + o_off * ext]))
        ws.append(np.array([w_out, w_in, w_in, w_out]) * ext)
    pts = np.stack(np.meshgrid(xs[0], xs[1], indexing="ij"), axis=-1).reshape(16, 2)
    wts = np.outer(ws[0], ws[1]).reshape(16)
    return QuadratureRule(pts, wts)


@dataclass(frozen=True)
class FundamentalForms:
    """First, second, and third fundamental forms at one surface point."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    sqrt_a: float
    a_inv: np.ndarray


def fundamental_forms(frame: SurfaceFrame) -> FundamentalForms:
    """Forms from a surface frame; the third form uses analytic derivatives
    of the normalized normal rather than finite differences."""
    a1, a2, a3 = frame.a1, frame.a2, frame.a3
    a = np.array([[a1 @ a1, a1 @ a2], [a1 @ a2, a2 @ a2]])
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    if det <= 0.0:
        raise DomainError("first fundamental form is not positive definite")
    sqrt_a = float(np.sqrt(det))
    second = {(0, 0): frame.a11, (0, 1): frame.a12,
              (1, 0): frame.a12, (1, 1): frame.a22}
    b = np.array([[second[(i, j)] @ a3 for j in range(2)] for i in range(2)])
    # derivatives of the unnormalized normal, then of the unit normal
    at_d1 = np.cross(frame.a11, a2) + np.cross(a1, frame.a12)
    at_d2 = np.cross(frame.a12, a2) + np.cross(a1, frame.a22)
    proj = np.eye(3) - np.outer(a3, a3)
    n_d = [proj @ at_d1 / sqrt_a, proj @ at_d2 / sqrt_a]
    c = np.array([[n_d[i] @ n_d[j] for j in range(2)] for i in range(2)])
    a_inv = np.linalg.inv(a)
    return FundamentalForms(a, b, c, sqrt_a, a_inv)


@dataclass(frozen=True)
class StrainState:
    """Membrane (A), bending (B), and second-order (C) strain tensors."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    @classmethod
    def from_forms(cls, deformed: FundamentalForms, reference: FundamentalForms):
        return cls(0.5 * (deformed.a - reference.a),
                   0.5 * (deformed.b - reference.b),
                   0.5 * (deformed.c - reference.c))


def voigt_H(a_inv_ref: np.ndarray, material: Material) -> np.ndarray:
    """The symmetric 3x3 Voigt matrix of the plane-stress elasticity tensor."""
    lam, mu = material.lam, material.mu
    a11, a22, a12 = a_inv_ref[0, 0], a_inv_ref[1, 1], a_inv_ref[0, 1]
    return np.array([
        [(lam + 2 * mu) * a11**2,
         lam * a11 * a22 + 2 * mu * a12**2,
         (lam + 2 * mu) * a11 * a12],
        [lam * a11 * a22 + 2 * mu * a12**2,
         (lam + 2 * mu) * a22**2,
         (lam + 2 * mu) * a12 * a22],
        [(lam + 2 * mu) * a11 * a12,
         (lam + 2 * mu) * a12 * a22,
         (lam + mu) * a12**2 + mu * a11 * a22],
    ])


def elasticity_tensor(a_inv_ref: np.ndarray, material: Material) -> np.ndarray:
    """The 4-index elasticity tensor H^{abgd} built from the contravariant
    reference metric."""
    lam, mu = material.lam, material.mu
    ai = a_inv_ref
    return (lam / 2.0 * np.einsum("ab,cd->abcd", ai, ai)
            + mu * np.einsum("bc,ad->abcd", ai, ai))


@dataclass(frozen=True)
class VoigtData:
    """Voigt packing of the elasticity matrix and the two strain vectors."""

    Hm: np.ndarray
    alpha_v: np.ndarray
    beta_v: np.ndarray

    @classmethod
    def from_strain(cls, strain: StrainState, Hm: np.ndarray):
        A, B = strain.A, strain.B
        alpha = np.array([A[0, 0], A[1, 1], 2.0 * A[0, 1]])
        beta = 2.0 * np.array([B[0, 0], B[1, 1], 2.0 * B[0, 1]])
        return cls(Hm, alpha, beta)


def energy_density(strain: StrainState, elasticity, material: Material) -> float:
    """Elastic energy per unit reference area.

    ``elasticity`` is either the 3x3 Voigt matrix (or a VoigtData) or the
    4-index tensor; both contractions give the same value.
    """
    h = material.thickness
    if isinstance(elasticity, VoigtData):
        elasticity = elasticity.Hm
    elasticity = np.asarray(elasticity)
    if elasticity.shape == (2, 2, 2, 2):
        mem = np.einsum("ab,cd,abcd->", strain.A, strain.A, elasticity)
        ben = np.einsum("ab,cd,abcd->", strain.B, strain.B, elasticity)
        return float(h * mem + h**3 / 3.0 * ben)
    if elasticity.shape == (3, 3):
        v = VoigtData.from_strain(strain, elasticity)
        return float(h / 2.0 * v.alpha_v @ elasticity @ v.alpha_v
                     + h**3 / 24.0 * v.beta_v @ elasticity @ v.beta_v)
    raise DomainError(f"elasticity must be 3x3 or 2x2x2x2, got {elasticity.shape}")


def _patch_geometry(tables, Q):
    """Vectorized frame quantities at all quadrature points of all patches.

    ``Q`` is (P, 16, 3) gathered patch dofs; returns dict of (P, nq, ...)
    arrays.
    """
    dphi, ddphi = tables.dphi, tables.ddphi
    a1 = np.einsum("qI,pIc->pqc", dphi[:, :, 0], Q)
    a2 = np.einsum("qI,pIc->pqc", dphi[:, :, 1], Q)
    a11 = np.einsum("qI,pIc->pqc", ddphi[:, :, 0], Q)
    a12 = np.einsum("qI,pIc->pqc", ddphi[:, :, 1], Q)
    a22 = np.einsum("qI,pIc->pqc", ddphi[:, :, 2], Q)
    atilde = np.cross(a1, a2)
    r = np.linalg.norm(atilde, axis=-1)
    if np.any(r <= 0.0):
        raise DomainError("degenerate surface frame at a quadrature point")
    n = atilde / r[..., None]
    a_ab = np.empty(a1.shape[:2] + (2, 2))
    a_ab[..., 0, 0] = np.einsum("pqc,pqc->pq", a1, a1)
    a_ab[..., 0, 1] = a_ab[..., 1, 0] = np.einsum("pqc,pqc->pq", a1, a2)
    a_ab[..., 1, 1] = np.einsum("pqc,pqc->pq", a2, a2)
    b_ab = np.empty_like(a_ab)
    b_ab[..., 0, 0] = np.einsum("pqc,pqc->pq", a11, n)
    b_ab[..., 0, 1] = b_ab[..., 1, 0] = np.einsum("pqc,pqc->pq", a12, n)
    b_ab[..., 1, 1] = np.einsum("pqc,pqc->pq", a22, n)
    return {"a1": a1, "a2": a2, "a11": a11, "a12": a12, "a22": a22,
            "atilde": atilde, "r": r, "n": n, "a": a_ab, "b": b_ab}


@dataclass
class ShapeTables:
    """Shape-function values at the quadrature points of a unit patch cell."""

    theta: np.ndarray       # (nq, 2) local quadrature coordinates
    weights: np.ndarray     # (nq,) quadrature weights on the unit cell
    phi: np.ndarray         # (nq, 16)
    dphi: np.ndarray        # (nq, 16, 2)
    ddphi: np.ndarray       # (nq, 16, 3)


def _unit_cell_tables() -> ShapeTables:
    from .hermite import UNIT_RECT
    rule = gauss_legendre_16(UNIT_RECT)
    nq = len(rule.weights)
    phi = np.empty((nq, 16))
    dphi = np.empty((nq, 16, 2))
    ddphi = np.empty((nq, 16, 3))
    for k, (x1, x2) in enumerate(rule.points):
        phi[k], dphi[k], ddphi[k] = shape_rows(UNIT_RECT, x1, x2)
    return ShapeTables(rule.points.copy(), rule.weights.copy(), phi, dphi, ddphi)


class ReferenceCache:
    """Per-patch, per-quadrature-point reference quantities, built once."""

    def __init__(self, grid: PatchGrid, material: Material, q_ref: np.ndarray):
        self.grid = grid
        self.material = material
        self.q_ref = np.asarray(q_ref, dtype=float).copy()
        self.tables = _unit_cell_tables()
        Q = grid.gather_patches(self.q_ref)
        geo = _patch_geometry(self.tables, Q)
        a = geo["a"]
        det = a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
        if np.any(det <= 0.0):
            raise DomainError("reference metric is singular")
        self.sqrt_a = np.sqrt(det)
        inv = np.empty_like(a)
        inv[..., 0, 0] = a[..., 1, 1] / det
        inv[..., 1, 1] = a[..., 0, 0] / det
        inv[..., 0, 1] = inv[..., 1, 0] = -a[..., 0, 1] / det
        self.a_inv = inv
        self.a_bar = a
        self.b_bar = geo["b"]
        lam, mu = material.lam, material.mu
        a11, a22, a12 = inv[..., 0, 0], inv[..., 1, 1], inv[..., 0, 1]
        Hm = np.empty(a.shape[:2] + (3, 3))
        Hm[..., 0, 0] = (lam + 2 * mu) * a11**2
        Hm[..., 0, 1] = Hm[..., 1, 0] = lam * a11 * a22 + 2 * mu * a12**2
        Hm[..., 0, 2] = Hm[..., 2, 0] = (lam + 2 * mu) * a11 * a12
        Hm[..., 1, 1] = (lam + 2 * mu) * a22**2
        Hm[..., 1, 2] = Hm[..., 2, 1] = (lam + 2 * mu) * a12 * a22
        Hm[..., 2, 2] = (lam + mu) * a12**2 + mu * a11 * a22
        self.Hm = Hm
        # reference area measure per quadrature point
        self.w_area = self.tables.weights[None, :] * self.sqrt_a

    @property
    def n_scalar_dofs(self) -> int:
        return self.grid.n_dofs

    def reference_area(self) -> float:
        return float(self.w_area.sum())


def _scatter_vector(grid: PatchGrid, elem: np.ndarray) -> np.ndarray:
    """Accumulate (P, 16, 3) element vectors into a flat (3N,) vector."""
    out = np.zeros((grid.n_dofs, 3))
    np.add.at(out, grid.gather, elem)
    return out.ravel()


def _scatter_blocks(grid: PatchGrid, elem: np.ndarray) -> sp.csr_matrix:
    """Accumulate (P, 16, 16) scalar element matrices into an N x N matrix."""
    g = grid.gather
    rows = np.repeat(g, 16, axis=1).ravel()
    cols = np.tile(g, (1, 16)).ravel()
    mat = sp.coo_matrix((elem.ravel(), (rows, cols)),
                        shape=(grid.n_dofs, grid.n_dofs))
    return mat.tocsr()


def mass_matrix(grid: PatchGrid, material: Material, reference: ReferenceCache) -> sp.csr_matrix:
    """Sparse symmetric mass matrix on the 3N generalized coordinates."""
    t = reference.tables
    coeff = material.density * material.thickness * reference.w_area
    elem = np.einsum("pq,qI,qJ->pIJ", coeff, t.phi, t.phi)
    scalar = _scatter_blocks(grid, elem)
    return sp.kron(scalar, sp.identity(3, format="csr"), format="csr")


@dataclass
class PointForce:
    xi1: float
    xi2: float
    force: np.ndarray


@dataclass
class Traction:
    """Constant line load on one boundary side of the parameter domain."""

    side: str                 # "xi1_min" | "xi1_max" | "xi2_min" | "xi2_max"
    force: np.ndarray         # force per unit reference arc length


@dataclass
class Loads:
    gravity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    pressure: float = 0.0
    point_forces: list = field(default_factory=list)
    tractions: list = field(default_factory=list)

    def __post_init__(self):
        self.gravity = np.asarray(self.gravity, dtype=float)


def external_forces(grid: PatchGrid, reference: ReferenceCache, loads: Loads,
                    q: np.ndarray | None = None) -> np.ndarray:
    """Generalized force vector for areal, point, and boundary-line loads.

    Pressure acts along the deformed unit normal, so it needs the current
    configuration; gravity and tractions integrate over the reference
    surface.  Point forces are distributed by the shape functions at their
    parameter location without quadrature.
    """
    t = reference.tables
    mat = reference.material
    elem = np.zeros((grid.n_patches, 16, 3))
    if np.any(loads.gravity != 0.0):
        areal = mat.density * mat.thickness * loads.gravity
        elem += np.einsum("pq,qI,c->pIc", reference.w_area, t.phi, areal)
    if loads.pressure != 0.0:
        cfg = reference.q_ref if q is None else q
        geo = _patch_geometry(t, grid.gather_patches(cfg))
        elem += loads.pressure * np.einsum("pq,qI,pqc->pIc",
                                           reference.w_area, t.phi, geo["n"])
    f = _scatter_vector(grid, elem)
    fb = f.reshape(-1, 3)
    for pf in loads.point_forces:
        pid = grid.locate(pf.xi1, pf.xi2)
        phi, _, _ = shape_rows(grid.patch_rect(pid), pf.xi1, pf.xi2)
        fb[grid.gather[pid]] += np.outer(phi, np.asarray(pf.force, dtype=float))
    for tr in loads.tractions:
        _add_traction(grid, reference, tr, fb)
    return f


def _add_traction(grid: PatchGrid, reference: ReferenceCache, tr: Traction, fb):
    """4-point line quadrature of a constant traction along one boundary."""
    force = np.asarray(tr.force, dtype=float)
    i_off, o_off = _GL4_OFFSETS
    w_in, w_out = _GL4_WEIGHTS
    offs = np.array([-o_off, -i_off, i_off, o_off]) + 0.5
    lws = np.array([w_out, w_in, w_in, w_out])
    qref = reference.q_ref
    if tr.side in ("xi1_min", "xi1_max"):
        fixed = 0.0 if tr.side == "xi1_min" else float(grid.nx)
        cells = [(grid.locate(min(max(fixed, 1e-9), grid.nx - 1e-9), py + 0.5), py)
                 for py in range(grid.ny)]
        for pid, py in cells:
            patch = grid.patch_from_config(qref, pid)
            for off, lw in zip(offs, lws):
                xi2 = py + off
                _, a2t, *_ = patch.eval_derivatives(fixed, xi2)
                phi, _, _ = shape_rows(grid.patch_rect(pid), fixed, xi2)
                fb[grid.gather[pid]] += lw * np.linalg.norm(a2t) * np.outer(phi, force)
    elif tr.side in ("xi2_min", "xi2_max"):
        fixed = 0.0 if tr.side == "xi2_min" else float(grid.ny)
        cells = [(grid.locate(px + 0.5, min(max(fixed, 1e-9), grid.ny - 1e-9)), px)
                 for px in range(grid.nx)]
        for pid, px in cells:
            patch = grid.patch_from_config(qref, pid)
            for off, lw in zip(offs, lws):
                xi1 = px + off
                a1t, *_ = patch.eval_derivatives(xi1, fixed)
                phi, _, _ = shape_rows(grid.patch_rect(pid), xi1, fixed)
                fb[grid.gather[pid]] += lw * np.linalg.norm(a1t) * np.outer(phi, force)
    else:
        raise DomainError(f"unknown traction side {tr.side!r}")
