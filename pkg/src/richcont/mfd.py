"""Mixed mimetic finite differences with cell heads and face fluxes.

Unknown layout: ``x = [w_0 .. w_{nf-1}, p_0 .. p_{nc-1}]`` where ``w_f`` is
the saturated-driving flux density across face f along its stored normal
(m/day) and ``p_c`` the hydraulic head of cell c (m). The physical Darcy
flux is ``u_f = cK_f * w_f``.

Flux rows (one per non-Neumann face) discretize K^-1 w = -grad p through
local inner-product matrices M_c; mass rows are the finite volume
divergence of u. Neumann faces replace their flux row by the prescribed
physical flux.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sps

from . import constitutive as C
from .constitutive import ContinuationKind, VgmMaterial
from .dual import Dual
from .fv_tpfa import cell_tensors, upwind_weight
from .mesh import Mesh
from .system import BoundaryCondition, DiscreteSystem, resolve_boundary


class DegenerateCellError(ValueError):
    pass


# gamma = GAMMA_SCALE * trace(M0) / #faces. With 2, M is diagonal on
# rectangles with isotropic K and the scheme coincides with TPFA there;
# smaller values couple opposite faces and make w_f (and hence the upwinded
# flux) depend on neighbouring gradients, which slows Newton down markedly.
GAMMA_SCALE = 2.0


@dataclass(frozen=True)
class LocalInnerProduct:
    """Per-cell mimetic inner product and its consistency data.

    ``N`` has rows sigma_f * (K n_f)^T and ``R`` rows area_f * (x_f - x_c)^T;
    both refer to the outward orientation of the cell, so that M N = R.
    """

    M: np.ndarray
    N: np.ndarray
    R: np.ndarray
    consistent: np.ndarray
    stabilization: np.ndarray
    gamma: float


def local_inner_product(
    R: np.ndarray, N: np.ndarray, K: np.ndarray, volume: float, gamma_scale: float = GAMMA_SCALE, cell: int = -1
) -> LocalInnerProduct:
    """M = R K^-1 R^T / vol + gamma * (I - N (N^T N)^-1 N^T)."""
    NtN = N.T @ N
    if np.linalg.cond(NtN) > 1e12:
        raise DegenerateCellError(f"cell {cell}: singular N^T N (degenerate geometry)")
    consistent = R @ np.linalg.solve(K, R.T) / volume
    P = np.eye(len(N)) - N @ np.linalg.solve(NtN, N.T)
    gamma = gamma_scale * np.trace(consistent) / len(N)
    M = consistent + gamma * P
    M = 0.5 * (M + M.T)
    return LocalInnerProduct(M, N, R, consistent, gamma * P, gamma)


def build_local_matrices(
    mesh: Mesh,
    materials: Sequence[VgmMaterial],
    cell_material: np.ndarray,
    gamma_scale: float = GAMMA_SCALE,
) -> list[LocalInnerProduct]:
    K = cell_tensors(materials, cell_material)
    out = []
    for c in range(mesh.n_cells):
        faces = mesh.cell_faces[c]
        sig = mesh.cell_signs[c]
        N = sig[:, None] * (mesh.face_normal[faces] @ K[c].T)
        R = mesh.local_R(c)
        out.append(local_inner_product(R, N, K[c], mesh.cell_volume[c], gamma_scale, c))
    return out


class MfdSystem(DiscreteSystem):
    """Mixed MFD discretization of div u = Q, u = -cK(p, q) K grad p."""

    def __init__(
        self,
        mesh: Mesh,
        materials: Sequence[VgmMaterial],
        cell_material: np.ndarray,
        bc: Mapping[str, BoundaryCondition],
        sources: np.ndarray | float = 0.0,
        kind: ContinuationKind | str = ContinuationKind.POWER,
        kr_floor: float = C.KR_FLOOR,
        gamma_scale: float = GAMMA_SCALE,
        upwind: str = "flux",
    ):
        if not gamma_scale > 0.0:
            raise ValueError(f"gamma_scale must be positive, got {gamma_scale}")
        if upwind not in ("flux", "head"):
            raise ValueError(f"upwind must be 'flux' or 'head', got {upwind!r}")
        self.upwind = upwind
        self.mesh = mesh
        self.materials = list(materials)
        self.cell_material = np.asarray(cell_material, dtype=int)
        if self.cell_material.shape != (mesh.n_cells,):
            raise ValueError("cell_material must have one entry per cell")
        self.kind = ContinuationKind(kind)
        self.kr_floor = kr_floor
        self.nf = mesh.n_faces
        self.nc = mesh.n_cells
        self.size = self.nf + self.nc
        self.sources = np.broadcast_to(np.asarray(sources, dtype=float), (self.nc,)).copy()
        self.boundary = resolve_boundary(mesh, bc)
        self.params = C.stack_materials(self.materials, self.cell_material)
        self.z_cell = mesh.cell_centroid[:, 1]
        self.local = build_local_matrices(mesh, self.materials, self.cell_material, gamma_scale)

        fc = mesh.face_cells
        b = self.boundary
        self.is_neumann = np.zeros(self.nf, dtype=bool)
        self.is_neumann[b.neumann_faces] = True
        self.int_faces = mesh.interior_faces
        self.c1 = fc[self.int_faces, 0]
        self.c2 = fc[self.int_faces, 1]
        self.d_faces = b.dirichlet_faces
        self.d_cells = fc[self.d_faces, 0]
        self.d_head = b.dirichlet_head
        d_params = C.stack_materials(self.materials, self.cell_material[self.d_cells])
        self.kr_d = np.asarray(
            C.kr_of_head(d_params, self.d_head, mesh.face_centroid[self.d_faces, 1], kr_floor), dtype=float
        )
        self.n_faces_ = b.neumann_faces
        self.n_cells_ = fc[self.n_faces_, 0]
        self.n_inflow = b.neumann_inflow

        # constant flux block: sum_c diag(sigma) M_c diag(sigma) and -sigma*area on p
        rows, cols, vals = [], [], []
        for c, lip in enumerate(self.local):
            faces = mesh.cell_faces[c]
            sig = mesh.cell_signs[c]
            B = sig[:, None] * lip.M * sig[None, :]
            rows.append(np.repeat(faces, len(faces)))
            cols.append(np.tile(faces, len(faces)))
            vals.append(B.ravel())
        cells, faces, signs = mesh.cell_face_incidence()
        rows.append(faces)
        cols.append(self.nf + cells)
        vals.append(-signs * mesh.face_area[faces])
        keep = [~self.is_neumann[r] for r in rows]
        flux = sps.csr_matrix(
            (
                np.concatenate([v[k] for v, k in zip(vals, keep)]),
                (np.concatenate([r[k] for r, k in zip(rows, keep)]), np.concatenate([c[k] for c, k in zip(cols, keep)])),
            ),
            shape=(self.nf, self.size),
        )
        flux.sum_duplicates()
        self.flux_block = flux
        self.flux_rhs = np.zeros(self.nf)
        self.flux_rhs[self.d_faces] = mesh.face_area[self.d_faces] * self.d_head
        # divergence incidence G[c, f] = sigma * area
        self.G = sps.csr_matrix((signs * mesh.face_area[faces], (cells, faces)), shape=(self.nc, self.nf))
        self._inc = (cells, faces, signs)

    def split(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.size,):
            raise ValueError(f"state has shape {x.shape}, expected ({self.size},)")
        return x[: self.nf], x[self.nf :]

    def _face_k(self, w, p, q):
        """cK per face and d(cK)/dp with respect to the first and second cell.

        With ``upwind="flux"`` the upwind side follows the sign of w_f (the
        donor cell of the saturated-driving flux), so u = cK * w stays
        continuous when the upwind side switches. ``upwind="head"`` compares
        cell heads instead; because w_f need not vanish when neighbouring
        heads coincide, that choice makes the residual jump and can trap
        Newton in a two-cycle.
        """
        kr = C.kr_of_head(self.params, Dual.variable(p), self.z_cell, self.kr_floor)
        kr_c, dkr_c = np.asarray(kr.val, float), np.asarray(kr.der, float)
        kr_f = np.ones(self.nf)
        # weight of the first cell of each face and its partner
        wa = np.zeros(self.nf)
        wb = np.zeros(self.nf)
        ca = self.mesh.face_cells[:, 0]
        cb = np.where(self.mesh.face_cells[:, 1] >= 0, self.mesh.face_cells[:, 1], 0)
        f = self.int_faces
        if self.upwind == "flux":
            s = upwind_weight(w[f], 0.0)
        else:
            s = upwind_weight(p[self.c1], p[self.c2])
        kr_f[f] = s * kr_c[self.c1] + (1.0 - s) * kr_c[self.c2]
        wa[f], wb[f] = s, 1.0 - s
        f = self.d_faces
        if self.upwind == "flux":
            s = upwind_weight(w[f], 0.0)
        else:
            s = upwind_weight(p[self.d_cells], self.d_head)
        kr_f[f] = s * kr_c[self.d_cells] + (1.0 - s) * self.kr_d
        wa[f] = s
        f = self.n_faces_
        kr_f[f] = kr_c[self.n_cells_]
        wa[f] = 1.0
        k, dk = C.continuation_kr_dkr(kr_f, q, self.kind)
        return k, dk * wa * dkr_c[ca], dk * wb * dkr_c[cb], ca, cb

    def physical_flux(self, x: np.ndarray, q: float = 1.0) -> np.ndarray:
        """u_f = cK_f * w_f, m/day along the stored normal."""
        w, p = self.split(x)
        k = self._face_k(w, p, q)[0]
        return k * w

    def face_fluxes(self, x: np.ndarray, q: float = 1.0) -> np.ndarray:
        """Total Darcy flux per face along the stored normal, m^3/day."""
        return self.physical_flux(x, q) * self.mesh.face_area

    def residual(self, x: np.ndarray, q: float) -> np.ndarray:
        w, p = self.split(x)
        k = self._face_k(w, p, q)[0]
        u = k * w
        F = np.empty(self.size)
        Ff = self.flux_block @ x + self.flux_rhs
        Ff[self.n_faces_] = u[self.n_faces_] + self.n_inflow
        F[: self.nf] = Ff
        F[self.nf :] = self.G @ u - self.sources * self.mesh.cell_volume
        return F

    def jacobian(self, x: np.ndarray, q: float) -> sps.csr_matrix:
        """Jacobian with upwind sides frozen at ``x``."""
        w, p = self.split(x)
        k, dka, dkb, ca, cb = self._face_k(w, p, q)
        nf = self.nf
        cells, faces, signs = self._inc
        ga = signs * self.mesh.face_area[faces]
        has_b = self.mesh.face_cells[faces, 1] >= 0
        rows = [faces[:0]]
        cols = [faces[:0]]
        vals = [ga[:0]]
        # mass rows: d/dw and d/dp through the upwind cK
        rows += [nf + cells, nf + cells, nf + cells[has_b]]
        cols += [faces, nf + ca[faces], nf + cb[faces][has_b]]
        vals += [ga * k[faces], ga * w[faces] * dka[faces], (ga * w[faces] * dkb[faces])[has_b]]
        # Neumann rows
        nfc = self.n_faces_
        rows += [nfc, nfc]
        cols += [nfc, nf + self.n_cells_]
        vals += [k[nfc], w[nfc] * dka[nfc]]
        nonlin = sps.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(self.size, self.size)
        )
        lin = sps.vstack([self.flux_block, sps.csr_matrix((self.nc, self.size))], format="csr")
        J = (lin + nonlin).tocsr()
        J.sum_duplicates()
        J.sort_indices()
        return J

    def initial_guess(self) -> np.ndarray:
        x = np.zeros(self.size)
        x[self.nf :] = self.boundary.mean_dirichlet_head
        return x

    def heads(self, x: np.ndarray) -> np.ndarray:
        return self.split(x)[1].copy()

    def boundary_inflow(self, x: np.ndarray, q: float = 1.0) -> float:
        flux = self.face_fluxes(x, q)
        return float(-flux[self.mesh.boundary_faces].sum())

    def total_source(self) -> float:
        return float((self.sources * self.mesh.cell_volume).sum())
