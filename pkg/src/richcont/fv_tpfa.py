"""Cell-centered two-point flux approximation for the steady Richards equation.

Unknowns are hydraulic heads per cell. The residual of cell c is its net
outward Darcy flux minus its source,

    F_c = sum_f sigma(c, f) * flux_f - Q_c * vol_c,

with flux_f = cK_f * T_f * (h_1 - h_2) along the stored face normal (from
cell 1 to cell 2), T_f the harmonic mean of half-transmissibilities and cK_f
the continuation-parametrized relative permeability of the face.
"""

from __future__ import annotations

import enum
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sps

from . import constitutive as C
from .constitutive import ContinuationKind, VgmMaterial
from .dual import Dual
from .mesh import Mesh
from .system import BoundaryCondition, DiscreteSystem, resolve_boundary


class FaceApproximation(enum.Enum):
    UPWIND = "upwind"
    CENTRAL = "central"


def half_transmissibility(area: float, normal, K: np.ndarray, face_centroid, cell_centroid) -> float:
    """area * (n^T K n) / d, with d the normal distance from cell center to face."""
    n = np.asarray(normal, dtype=float)
    K = np.atleast_2d(np.asarray(K, dtype=float))
    if K.shape == (1, 1):
        K = K[0, 0] * np.eye(len(n))
    dist = abs(np.dot(np.asarray(face_centroid, float) - np.asarray(cell_centroid, float), n))
    if dist <= 1e-14:
        raise ValueError("degenerate geometry: cell center lies on the face plane")
    return float(area * (n @ K @ n) / dist)


def face_transmissibility(t1, t2):
    """Harmonic combination of two half-transmissibilities."""
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(np.isinf(t2), t1, np.where(np.isinf(t1), t2, t1 * t2 / (t1 + t2)))
    return out if out.ndim else float(out)


def upwind_weight(h1, h2):
    """Weight of side 1 in the upwind face value: 1, 0, or 1/2 on a tie."""
    h1 = np.asarray(h1, dtype=float)
    h2 = np.asarray(h2, dtype=float)
    return np.where(h1 > h2, 1.0, np.where(h1 < h2, 0.0, 0.5))


def face_relperm(h1, h2, kr1, kr2, approximation=FaceApproximation.UPWIND):
    approximation = FaceApproximation(approximation)
    if approximation is FaceApproximation.CENTRAL:
        w = 0.5
    else:
        w = upwind_weight(h1, h2)
    out = w * np.asarray(kr1, dtype=float) + (1.0 - w) * np.asarray(kr2, dtype=float)
    return out if np.ndim(out) else float(out)


def cell_tensors(materials: Sequence[VgmMaterial], cell_material: np.ndarray) -> np.ndarray:
    per_mat = np.array([m.tensor2d() for m in materials])
    return per_mat[np.asarray(cell_material, dtype=int)]


class TpfaSystem(DiscreteSystem):
    """TPFA discretization of -div(cK(h, q) K grad h) = Q on ``mesh``."""

    def __init__(
        self,
        mesh: Mesh,
        materials: Sequence[VgmMaterial],
        cell_material: np.ndarray,
        bc: Mapping[str, BoundaryCondition],
        sources: np.ndarray | float = 0.0,
        approximation: FaceApproximation | str = FaceApproximation.UPWIND,
        kind: ContinuationKind | str = ContinuationKind.POWER,
        kr_floor: float = C.KR_FLOOR,
    ):
        self.mesh = mesh
        self.materials = list(materials)
        self.cell_material = np.asarray(cell_material, dtype=int)
        if self.cell_material.shape != (mesh.n_cells,):
            raise ValueError("cell_material must have one entry per cell")
        self.approximation = FaceApproximation(approximation)
        self.kind = ContinuationKind(kind)
        self.kr_floor = kr_floor
        self.size = mesh.n_cells
        self.sources = np.broadcast_to(np.asarray(sources, dtype=float), (mesh.n_cells,)).copy()
        self.boundary = resolve_boundary(mesh, bc)
        self.params = C.stack_materials(self.materials, self.cell_material)
        self.z_cell = mesh.cell_centroid[:, 1]

        K = cell_tensors(self.materials, self.cell_material)
        fc = mesh.face_cells
        n = mesh.face_normal

        def half(faces, cells):
            d = np.abs(np.einsum("ij,ij->i", mesh.face_centroid[faces] - mesh.cell_centroid[cells], n[faces]))
            if np.any(d <= 1e-14):
                raise ValueError("degenerate geometry: cell center lies on a face")
            nKn = np.einsum("ij,ijk,ik->i", n[faces], K[cells], n[faces])
            return mesh.face_area[faces] * nKn / d

        self.int_faces = mesh.interior_faces
        self.c1 = fc[self.int_faces, 0]
        self.c2 = fc[self.int_faces, 1]
        self.T_int = face_transmissibility(half(self.int_faces, self.c1), half(self.int_faces, self.c2))

        b = self.boundary
        self.d_faces = b.dirichlet_faces
        self.d_cells = fc[self.d_faces, 0]
        self.d_head = b.dirichlet_head
        self.T_d = half(self.d_faces, self.d_cells)
        d_params = C.stack_materials(self.materials, self.cell_material[self.d_cells])
        self.kr_d = np.asarray(
            C.kr_of_head(d_params, self.d_head, mesh.face_centroid[self.d_faces, 1], kr_floor), dtype=float
        )
        self.n_faces_ = b.neumann_faces
        self.n_cells_ = fc[self.n_faces_, 0]
        self.n_inflow = b.neumann_inflow * mesh.face_area[self.n_faces_]  # m^3/day into the domain

    # constitutive evaluation ----------------------------------------------

    def cell_kr(self, h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        kr = C.kr_of_head(self.params, Dual.variable(h), self.z_cell, self.kr_floor)
        return np.asarray(kr.val, dtype=float), np.asarray(kr.der, dtype=float)

    def _weights(self, h):
        if self.approximation is FaceApproximation.CENTRAL:
            w_int = np.full(len(self.int_faces), 0.5)
            w_d = np.full(len(self.d_faces), 0.5)
        else:
            w_int = upwind_weight(h[self.c1], h[self.c2])
            w_d = upwind_weight(h[self.d_cells], self.d_head)
        return w_int, w_d

    def _face_terms(self, h, q):
        kr, dkr = self.cell_kr(h)
        w_int, w_d = self._weights(h)
        kr_int = w_int * kr[self.c1] + (1.0 - w_int) * kr[self.c2]
        kr_dir = w_d * kr[self.d_cells] + (1.0 - w_d) * self.kr_d
        k_int, dk_int = C.continuation_kr_dkr(kr_int, q, self.kind)
        k_dir, dk_dir = C.continuation_kr_dkr(kr_dir, q, self.kind)
        return kr, dkr, w_int, w_d, k_int, dk_int, k_dir, dk_dir

    # DiscreteSystem -------------------------------------------------------

    def initial_guess(self) -> np.ndarray:
        return np.full(self.size, self.boundary.mean_dirichlet_head)

    def face_fluxes(self, h: np.ndarray, q: float = 1.0) -> np.ndarray:
        """Darcy flux per face along the stored normal, m^3/day (unit thickness)."""
        h = np.asarray(h, dtype=float)
        _, _, _, _, k_int, _, k_dir, _ = self._face_terms(h, q)
        out = np.zeros(self.mesh.n_faces)
        out[self.int_faces] = k_int * self.T_int * (h[self.c1] - h[self.c2])
        out[self.d_faces] = k_dir * self.T_d * (h[self.d_cells] - self.d_head)
        out[self.n_faces_] = -self.n_inflow
        return out

    def residual(self, h: np.ndarray, q: float) -> np.ndarray:
        h = np.asarray(h, dtype=float)
        if h.shape != (self.size,):
            raise ValueError(f"state has shape {h.shape}, expected ({self.size},)")
        flux = self.face_fluxes(h, q)
        F = -self.sources * self.mesh.cell_volume
        F = F + np.bincount(self.c1, flux[self.int_faces], self.size)
        F = F - np.bincount(self.c2, flux[self.int_faces], self.size)
        F = F + np.bincount(self.d_cells, flux[self.d_faces], self.size)
        F = F + np.bincount(self.n_cells_, flux[self.n_faces_], self.size)
        return F

    def jacobian(self, h: np.ndarray, q: float) -> sps.csr_matrix:
        """dF/dh with the upwind side of every face frozen at ``h``."""
        h = np.asarray(h, dtype=float)
        kr, dkr, w_int, w_d, k_int, dk_int, k_dir, dk_dir = self._face_terms(h, q)
        T, c1, c2 = self.T_int, self.c1, self.c2
        dh = h[c1] - h[c2]
        d1 = k_int * T + T * dh * dk_int * w_int * dkr[c1]
        d2 = -k_int * T + T * dh * dk_int * (1.0 - w_int) * dkr[c2]
        dc = self.d_cells
        dd = k_dir * self.T_d + self.T_d * (h[dc] - self.d_head) * dk_dir * w_d * dkr[dc]
        rows = np.concatenate([c1, c1, c2, c2, dc])
        cols = np.concatenate([c1, c2, c1, c2, dc])
        vals = np.concatenate([d1, d2, -d1, -d2, dd])
        J = sps.csr_matrix((vals, (rows, cols)), shape=(self.size, self.size))
        J.sum_duplicates()
        J.sort_indices()
        return J

    # post-processing ------------------------------------------------------

    def heads(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float)

    def boundary_inflow(self, x: np.ndarray, q: float = 1.0) -> float:
        """Total flux into the domain through the boundary, m^3/day."""
        flux = self.face_fluxes(x, q)
        bf = self.mesh.boundary_faces
        return float(-flux[bf].sum())

    def total_source(self) -> float:
        return float((self.sources * self.mesh.cell_volume).sum())
