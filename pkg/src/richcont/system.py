"""Boundary conditions and the interface shared by both discretizations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Union

import numpy as np
import scipy.sparse as sps

from .mesh import Mesh


@dataclass(frozen=True)
class Dirichlet:
    """Prescribed hydraulic head, m.

    ``head`` is a constant or a callable evaluated on the (n, 2) array of face
    centroids.
    """

    head: Union[float, Callable[[np.ndarray], np.ndarray]]

    def values(self, points: np.ndarray) -> np.ndarray:
        if callable(self.head):
            return np.asarray(self.head(points), dtype=float).reshape(len(points))
        return np.full(len(points), float(self.head))


@dataclass(frozen=True)
class Neumann:
    """Prescribed normal flux, m/day, positive into the domain."""

    flux: float = 0.0


BoundaryCondition = Union[Dirichlet, Neumann]


@dataclass(frozen=True)
class BoundaryData:
    """Boundary conditions resolved to face index arrays."""

    dirichlet_faces: np.ndarray
    dirichlet_head: np.ndarray
    neumann_faces: np.ndarray
    neumann_inflow: np.ndarray  # m/day, positive into the domain

    @property
    def mean_dirichlet_head(self) -> float:
        if len(self.dirichlet_head) == 0:
            return 0.0
        return float(np.mean(self.dirichlet_head))


def resolve_boundary(mesh: Mesh, bc: Mapping[str, BoundaryCondition]) -> BoundaryData:
    """Map per-tag conditions onto boundary faces; every boundary face needs one."""
    unknown = set(bc) - set(mesh.boundary_tags)
    if unknown:
        raise ValueError(f"boundary conditions given for unknown tags {sorted(unknown)}")
    d_faces, d_head, n_faces, n_flux = [], [], [], []
    covered = np.zeros(mesh.n_faces, dtype=bool)
    for tag, cond in bc.items():
        faces = mesh.boundary_tags[tag]
        covered[faces] = True
        if isinstance(cond, Dirichlet):
            d_faces.append(faces)
            d_head.append(cond.values(mesh.face_centroid[faces]))
        elif isinstance(cond, Neumann):
            n_faces.append(faces)
            n_flux.append(np.full(len(faces), float(cond.flux)))
        else:
            raise TypeError(f"unsupported boundary condition {cond!r} on {tag!r}")
    missing = np.flatnonzero(~covered & (mesh.face_cells[:, 1] < 0))
    if len(missing):
        raise ValueError(f"{len(missing)} boundary faces have no condition (first: face {missing[0]})")

    def cat(parts, dtype):
        return np.concatenate(parts).astype(dtype) if parts else np.zeros(0, dtype=dtype)

    return BoundaryData(
        cat(d_faces, int), cat(d_head, float), cat(n_faces, int), cat(n_flux, float)
    )


class DiscreteSystem:
    """Nonlinear system F(x, q) = 0 with its Jacobian in x.

    Subclasses implement :meth:`residual`, :meth:`jacobian` and
    :meth:`initial_guess`; ``size`` is the number of unknowns.
    """

    size: int

    def residual(self, x: np.ndarray, q: float) -> np.ndarray:
        raise NotImplementedError

    def jacobian(self, x: np.ndarray, q: float) -> sps.csr_matrix:
        raise NotImplementedError

    def initial_guess(self) -> np.ndarray:
        raise NotImplementedError


class FunctionSystem(DiscreteSystem):
    """System given by plain callables; used for small model problems."""

    def __init__(self, residual, jacobian, x0):
        self._residual = residual
        self._jacobian = jacobian
        self._x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        self.size = len(self._x0)

    def residual(self, x, q):
        return np.atleast_1d(np.asarray(self._residual(x, q), dtype=float))

    def jacobian(self, x, q):
        return sps.csr_matrix(np.atleast_2d(np.asarray(self._jacobian(x, q), dtype=float)))

    def initial_guess(self):
        return self._x0.copy()
