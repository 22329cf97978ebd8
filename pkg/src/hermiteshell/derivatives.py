"""Analytic first and second derivatives of the elastic energy.

All derivatives are taken with respect to the generalized coordinates of the
discrete energy (the quadrature sum), so finite differences of the assembled
quantities agree to truncation order.  Assembly is vectorized over patches
and quadrature points; per-DoF derivative blocks are 3-vectors and Hessian
blocks are 3x3 with row index I and column index J.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .hermite import PatchGrid, ShapeEval, SurfaceFrame
from .shell import ReferenceCache, _patch_geometry, _scatter_vector

_VOIGT_AB = ((0, 0), (1, 1), (0, 1))


@dataclass(frozen=True)
class HessianWorkspace:
    """Per-point intermediates of the bending second-derivative formulas."""

    t1: np.ndarray
    t2: np.ndarray
    s1: np.ndarray
    s2: np.ndarray
    dA3_dq: np.ndarray      # (16, 3, 3) Jacobians of the unit normal
    D11: np.ndarray
    D22: np.ndarray
    D12: np.ndarray
    D21: np.ndarray


@dataclass(frozen=True)
class SparseSystemMatrix:
    """3Nx3N system matrix addressed by 3x3 blocks of DoF pairs."""

    matrix: sp.csr_matrix

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    @property
    def shape(self):
        return self.matrix.shape

    def block(self, i: int, j: int) -> np.ndarray:
        return self.matrix[3 * i:3 * i + 3, 3 * j:3 * j + 3].toarray()

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


def _skew(v):
    """Cross-product matrices for an (..., 3) array of vectors."""
    out = np.zeros(v.shape[:-1] + (3, 3))
    out[..., 0, 1] = -v[..., 2]
    out[..., 0, 2] = v[..., 1]
    out[..., 1, 0] = v[..., 2]
    out[..., 1, 2] = -v[..., 0]
    out[..., 2, 0] = -v[..., 1]
    out[..., 2, 1] = v[..., 0]
    return out


def strain_first_derivatives(frame: SurfaceFrame, shape: ShapeEval):
    """Per-DoF derivatives of the metric and curvature components.

    Returns (da, db), each (16, 3, 3): [dof, component in (11, 22, 12),
    coordinate].
    """
    a1, a2, n = frame.a1, frame.a2, frame.a3
    r = frame.cross_norm
    t1 = np.cross(a2, n)
    t2 = np.cross(n, a1)
    second = {(0, 0): frame.a11, (1, 1): frame.a22, (0, 1): frame.a12}
    d1, d2 = shape.dphi[:, 0], shape.dphi[:, 1]
    dd = {(0, 0): shape.ddphi[:, 0], (0, 1): shape.ddphi[:, 1], (1, 1): shape.ddphi[:, 2]}
    tang = {0: a1, 1: a2}
    dtan = {0: d1, 1: d2}
    da = np.empty((16, 3, 3))
    db = np.empty((16, 3, 3))
    for k, (al, be) in enumerate(_VOIGT_AB):
        da[:, k, :] = np.outer(dtan[al], tang[be]) + np.outer(dtan[be], tang[al])
        aab = second[(al, be)]
        bab = aab @ n
        db[:, k, :] = (np.outer(dd[(al, be)], n)
                       + (np.outer(d1, np.cross(a2, aab))
                          + np.outer(d2, np.cross(aab, a1))
                          - bab * (np.outer(d1, t1) + np.outer(d2, t2))) / r)
    return da, db


def normal_jacobians(frame: SurfaceFrame, shape: ShapeEval) -> np.ndarray:
    """(16, 3, 3) per-DoF Jacobians of the unit normal."""
    a1, a2, n = frame.a1, frame.a2, frame.a3
    r = frame.cross_norm
    t1 = np.cross(a2, n)
    t2 = np.cross(n, a1)
    d1, d2 = shape.dphi[:, 0], shape.dphi[:, 1]
    out = (-d1[:, None, None] * _skew(a2)[None]
           + d2[:, None, None] * _skew(a1)[None]
           - np.einsum("m,In->Imn", n, np.outer(d1, t1) + np.outer(d2, t2)))
    return out / r


def curvature_second_derivatives(frame: SurfaceFrame, shape: ShapeEval, al: int, be: int):
    """(16, 16, 3, 3) second derivative of one curvature component, plus the
    workspace of intermediates.  Indices: [I, J, row(I), col(J)]."""
    a1, a2, n = frame.a1, frame.a2, frame.a3
    r = frame.cross_norm
    a = r * r
    aab = {(0, 0): frame.a11, (1, 1): frame.a22, (0, 1): frame.a12,
           (1, 0): frame.a12}[(al, be)]
    bab = aab @ n
    t1 = np.cross(a2, n)
    t2 = np.cross(n, a1)
    s1 = np.cross(aab, a1)
    s2 = np.cross(a2, aab)
    eye = np.eye(3)
    D11 = (bab * (3 * np.outer(t1, t1) + np.outer(a2, a2) - (a2 @ a2) * eye)
           - np.outer(s2, t1) - np.outer(t1, s2)) / a
    D22 = (bab * (3 * np.outer(t2, t2) + np.outer(a1, a1) - (a1 @ a1) * eye)
           - np.outer(s1, t2) - np.outer(t2, s1)) / a
    D12 = (bab * (3 * np.outer(t1, t2) - 2 * np.outer(a1, a2) + np.outer(a2, a1)
                  + (a1 @ a2) * eye)
           - np.outer(s2, t2) - np.outer(t1, s1) - r * _skew(aab)) / a
    D21 = (bab * (3 * np.outer(t2, t1) - 2 * np.outer(a2, a1) + np.outer(a1, a2)
                  + (a1 @ a2) * eye)
           - np.outer(s1, t1) - np.outer(t2, s2) + r * _skew(aab)) / a
    dA3 = normal_jacobians(frame, shape)
    d1, d2 = shape.dphi[:, 0], shape.dphi[:, 1]
    ddk = {(0, 0): shape.ddphi[:, 0], (0, 1): shape.ddphi[:, 1],
           (1, 0): shape.ddphi[:, 1], (1, 1): shape.ddphi[:, 2]}[(al, be)]
    hess = (np.einsum("I,Jmn->IJmn", ddk, dA3)
            + np.einsum("J,Imn->IJnm", ddk, dA3)
            + np.einsum("I,J,mn->IJmn", d1, d1, D11)
            + np.einsum("I,J,mn->IJmn", d2, d2, D22)
            + np.einsum("I,J,mn->IJmn", d1, d2, D12)
            + np.einsum("I,J,mn->IJmn", d2, d1, D21))
    ws = HessianWorkspace(t1, t2, s1, s2, dA3, D11, D22, D12, D21)
    return hess, ws


def _strain_vectors(geo, ref: ReferenceCache):
    """Voigt strain vectors and their H-products at all quadrature points."""
    A = 0.5 * (geo["a"] - ref.a_bar)
    B = 0.5 * (geo["b"] - ref.b_bar)
    alpha = np.stack([A[..., 0, 0], A[..., 1, 1], 2.0 * A[..., 0, 1]], axis=-1)
    beta = 2.0 * np.stack([B[..., 0, 0], B[..., 1, 1], 2.0 * B[..., 0, 1]], axis=-1)
    h_alpha = np.einsum("pqij,pqj->pqi", ref.Hm, alpha)
    h_beta = np.einsum("pqij,pqj->pqi", ref.Hm, beta)
    return alpha, beta, h_alpha, h_beta


def total_energy(reference: ReferenceCache, q: np.ndarray) -> float:
    """Total elastic energy of a configuration (discrete quadrature sum)."""
    geo = _patch_geometry(reference.tables, reference.grid.gather_patches(q))
    alpha, beta, h_alpha, h_beta = _strain_vectors(geo, reference)
    h = reference.material.thickness
    dens = (h / 2.0 * np.einsum("pqi,pqi->pq", alpha, h_alpha)
            + h**3 / 24.0 * np.einsum("pqi,pqi->pq", beta, h_beta))
    return float((reference.w_area * dens).sum())


def _first_variation_tables(reference: ReferenceCache, geo):
    """Voigt strain-vector derivatives dalpha, dbeta as (P, nq, 3, 16, 3)."""
    t = reference.tables
    d1, d2 = t.dphi[:, :, 0], t.dphi[:, :, 1]
    dd11, dd12, dd22 = t.ddphi[:, :, 0], t.ddphi[:, :, 1], t.ddphi[:, :, 2]
    a1, a2, n, r = geo["a1"], geo["a2"], geo["n"], geo["r"]
    t1 = np.cross(a2, n)
    t2 = np.cross(n, a1)
    dal = np.empty(a1.shape[:2] + (3, 16, 3))
    dal[..., 0, :, :] = np.einsum("qI,pqc->pqIc", d1, a1)
    dal[..., 1, :, :] = np.einsum("qI,pqc->pqIc", d2, a2)
    dal[..., 2, :, :] = (np.einsum("qI,pqc->pqIc", d1, a2)
                         + np.einsum("qI,pqc->pqIc", d2, a1))
    # normal-drag direction shared by all curvature components
    drag = (np.einsum("qI,pqc->pqIc", d1, t1) + np.einsum("qI,pqc->pqIc", d2, t2))
    dbe = np.empty_like(dal)
    second = {0: geo["a11"], 1: geo["a22"], 2: geo["a12"]}
    ddk = {0: dd11, 1: dd22, 2: dd12}
    for k in range(3):
        aab = second[k]
        bab = np.einsum("pqc,pqc->pq", aab, n)
        term = (np.einsum("qI,pqc->pqIc", d1, np.cross(a2, aab))
                + np.einsum("qI,pqc->pqIc", d2, np.cross(aab, a1))
                - bab[..., None, None] * drag)
        dbe[..., k, :, :] = (np.einsum("qI,pqc->pqIc", ddk[k], n)
                             + term / r[..., None, None])
    dbe[..., 2, :, :] *= 2.0    # Voigt doubling of the shear entry
    return dal, dbe, t1, t2, drag


def elastic_gradient(reference: ReferenceCache, q: np.ndarray) -> np.ndarray:
    """Gradient of the elastic energy w.r.t. the 3N generalized coordinates."""
    grid = reference.grid
    geo = _patch_geometry(reference.tables, grid.gather_patches(q))
    _, _, h_alpha, h_beta = _strain_vectors(geo, reference)
    dal, dbe, _, _, _ = _first_variation_tables(reference, geo)
    h = reference.material.thickness
    w = reference.w_area
    gelem = (h * np.einsum("pq,pqi,pqiIc->pIc", w, h_alpha, dal)
             + h**3 / 12.0 * np.einsum("pq,pqi,pqiIc->pIc", w, h_beta, dbe))
    return _scatter_vector(grid, gelem)


def elastic_forces(reference: ReferenceCache, q: np.ndarray) -> np.ndarray:
    """Generalized elastic force vector (negated energy gradient)."""
    return -elastic_gradient(reference, q)


def _hessian_elements(reference: ReferenceCache, q: np.ndarray,
                      include_curvature_second_order: bool) -> np.ndarray:
    """(P, 48, 48) element Hessians of the elastic energy."""
    grid = reference.grid
    t = reference.tables
    geo = _patch_geometry(t, grid.gather_patches(q))
    _, _, h_alpha, h_beta = _strain_vectors(geo, reference)
    dal, dbe, t1, t2, drag = _first_variation_tables(reference, geo)
    h = reference.material.thickness
    w = reference.w_area
    d1, d2 = t.dphi[:, :, 0], t.dphi[:, :, 1]

    # Gauss-Newton parts: (d strain)^T H (d strain)
    x_al = np.einsum("pqij,pqjJb->pqiJb", reference.Hm, dal)
    elem = h * np.einsum("pq,pqiIa,pqiJb->pIaJb", w, dal, x_al)
    x_be = np.einsum("pqij,pqjJb->pqiJb", reference.Hm, dbe)
    elem += h**3 / 12.0 * np.einsum("pq,pqiIa,pqiJb->pIaJb", w, dbe, x_be)

    # membrane strain curvature: scalar blocks times identity
    wm = h * w
    s_m = (np.einsum("pq,qI,qJ->pIJ", wm * h_alpha[..., 0], d1, d1)
           + np.einsum("pq,qI,qJ->pIJ", wm * h_alpha[..., 1], d2, d2)
           + np.einsum("pq,qI,qJ->pIJ", wm * h_alpha[..., 2], d1, d2)
           + np.einsum("pq,qI,qJ->pIJ", wm * h_alpha[..., 2], d2, d1))
    elem += np.einsum("pIJ,ab->pIaJb", s_m, np.eye(3))

    if include_curvature_second_order:
        elem += _curvature_second_order_elements(reference, geo, h_beta,
                                                 t1, t2, drag)
    P = elem.shape[0]
    return elem.reshape(P, 48, 48)


def _curvature_second_order_elements(reference: ReferenceCache, geo, h_beta,
                                     t1, t2, drag):
    """Bending contribution sum_i (d^2 beta_i / dq dq) (H beta)_i, weighted.

    The four coupling matrices enter linearly in the current curvature
    component and its second-derivative vector, so the three Voigt components
    collapse into effective quantities before forming the matrices.
    """
    t = reference.tables
    d1, d2 = t.dphi[:, :, 0], t.dphi[:, :, 1]
    dd11, dd12, dd22 = t.ddphi[:, :, 0], t.ddphi[:, :, 1], t.ddphi[:, :, 2]
    a1, a2, n, r = geo["a1"], geo["a2"], geo["n"], geo["r"]
    a11v, a12v, a22v = geo["a11"], geo["a12"], geo["a22"]
    h = reference.material.thickness
    wq = h**3 / 12.0 * reference.w_area

    # Voigt weights of the three curvature components (beta doubling included)
    c11, c22, c12 = h_beta[..., 0], h_beta[..., 1], 2.0 * h_beta[..., 2]
    psi = (c11[..., None] * dd11[None, :, :] + c22[..., None] * dd22[None, :, :]
           + c12[..., None] * dd12[None, :, :])
    b_eff = (c11 * np.einsum("pqc,pqc->pq", a11v, n)
             + c22 * np.einsum("pqc,pqc->pq", a22v, n)
             + c12 * np.einsum("pqc,pqc->pq", a12v, n))
    c_eff = (c11[..., None] * a11v + c22[..., None] * a22v
             + c12[..., None] * a12v)

    dA3 = (-np.einsum("qJ,pqmn->pqJmn", d1, _skew(a2))
           + np.einsum("qJ,pqmn->pqJmn", d2, _skew(a1))
           - np.einsum("pqm,pqJn->pqJmn", n, drag)) / r[..., None, None, None]
    e1 = np.einsum("pq,pqI,pqJmn->pImJn", wq, psi, dA3)
    elem = e1 + e1.transpose(0, 3, 4, 1, 2)

    s1 = np.cross(c_eff, a1)
    s2 = np.cross(a2, c_eff)
    eye = np.eye(3)
    a_sc = geo["a"]
    area = r * r

    def outer(u, v):
        return np.einsum("pqm,pqn->pqmn", u, v)

    be = b_eff[..., None, None]
    D11 = (be * (3 * outer(t1, t1) + outer(a2, a2)
                 - a_sc[..., 1, 1, None, None] * eye)
           - outer(s2, t1) - outer(t1, s2)) / area[..., None, None]
    D22 = (be * (3 * outer(t2, t2) + outer(a1, a1)
                 - a_sc[..., 0, 0, None, None] * eye)
           - outer(s1, t2) - outer(t2, s1)) / area[..., None, None]
    sk = _skew(c_eff)
    D12 = (be * (3 * outer(t1, t2) - 2 * outer(a1, a2) + outer(a2, a1)
                 + a_sc[..., 0, 1, None, None] * eye)
           - outer(s2, t2) - outer(t1, s1) - r[..., None, None] * sk) / area[..., None, None]
    D21 = (be * (3 * outer(t2, t1) - 2 * outer(a2, a1) + outer(a1, a2)
                 + a_sc[..., 0, 1, None, None] * eye)
           - outer(s1, t1) - outer(t2, s2) + r[..., None, None] * sk) / area[..., None, None]
    elem += np.einsum("pq,qI,qJ,pqmn->pImJn", wq, d1, d1, D11)
    elem += np.einsum("pq,qI,qJ,pqmn->pImJn", wq, d2, d2, D22)
    elem += np.einsum("pq,qI,qJ,pqmn->pImJn", wq, d1, d2, D12)
    elem += np.einsum("pq,qI,qJ,pqmn->pImJn", wq, d2, d1, D21)
    return elem


def _scatter_hessian(grid: PatchGrid, elem: np.ndarray) -> sp.csr_matrix:
    comp = (3 * grid.gather[:, :, None] + np.arange(3)).reshape(-1, 48)
    rows = np.repeat(comp, 48, axis=1).ravel()
    cols = np.tile(comp, (1, 48)).ravel()
    n = 3 * grid.n_dofs
    return sp.coo_matrix((elem.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def exact_hessian(reference: ReferenceCache, q: np.ndarray) -> SparseSystemMatrix:
    """Exact Hessian of the elastic energy."""
    elem = _hessian_elements(reference, q, include_curvature_second_order=True)
    return SparseSystemMatrix(_scatter_hessian(reference.grid, elem))


def pseudo_hessian(reference: ReferenceCache, q: np.ndarray) -> SparseSystemMatrix:
    """Inexact Hessian dropping the curvature second-derivative term."""
    elem = _hessian_elements(reference, q, include_curvature_second_order=False)
    return SparseSystemMatrix(_scatter_hessian(reference.grid, elem))
