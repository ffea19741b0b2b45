"""Steady variably saturated flow with nonlinearity continuation.

The solver advances a homotopy parameter q from the linear saturated
problem (q = 0) to the full van Genuchten-Mualem problem (q = 1), correcting
each step with damped Newton. Two spatial discretizations are provided:
cell-centred TPFA (:mod:`richcont.fv_tpfa`) and mixed mimetic finite
differences (:mod:`richcont.mfd`).
"""

from .constitutive import KR_FLOOR, ContinuationKind, VgmMaterial
from .continuation import ContinuationFailure, ContinuationParams, ContinuationTrace, continuation_solve
from .fv_tpfa import TpfaSystem
from .mesh import Mesh, assign_materials, build_perturbed_grid, build_structured_grid
from .mfd import MfdSystem
from .newton import NewtonParams, newton_solve
from .system import Dirichlet, Neumann

__all__ = [
    "KR_FLOOR", "ContinuationKind", "VgmMaterial", "ContinuationFailure", "ContinuationParams",
    "ContinuationTrace", "continuation_solve", "TpfaSystem", "Mesh", "assign_materials",
    "build_perturbed_grid", "build_structured_grid", "MfdSystem", "NewtonParams", "newton_solve",
    "Dirichlet", "Neumann",
]

__version__ = "0.1.0"
