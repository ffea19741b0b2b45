"""Analytic and patch-test checks run by ``richcont verify``."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..constitutive import VgmMaterial
from ..fv_tpfa import TpfaSystem
from ..mesh import Mesh, build_perturbed_grid, build_structured_grid
from ..mfd import GAMMA_SCALE, MfdSystem
from ..newton import newton_solve
from ..system import Dirichlet
from .run import solve_config
from .scenarios import linear_head, scenario_linear_verification

SATURATED = VgmMaterial(2.5, 1.0, 2.0, 0.05, 0.4, name="saturated")
GRADIENT = np.array([0.7, -0.3])  # exact head h = c0 + g . x


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    tolerance: float
    seconds: float

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag}  {self.name}: {self.value:.3e} (tol {self.tolerance:.0e}, {self.seconds:.2f}s)"


def exact_head(points: np.ndarray) -> np.ndarray:
    return 0.4 + points @ GRADIENT


def _all_dirichlet(mesh: Mesh) -> dict:
    return {tag: Dirichlet(exact_head) for tag in mesh.boundary_tags}


def tpfa_patch_error(nx: int = 12, nz: int = 9) -> float:
    """Max head error of the q = 0 TPFA solve for linear data on a rectangle."""
    mesh = build_structured_grid(nx, nz, 3.0, 2.0)
    system = TpfaSystem(mesh, [SATURATED], np.zeros(mesh.n_cells, int), _all_dirichlet(mesh))
    h, rep = newton_solve(system, system.initial_guess(), 0.0)
    return float(np.max(np.abs(h - exact_head(mesh.cell_centroid))))


def mfd_patch_errors(gamma_scale: float = GAMMA_SCALE, jitter: float = 0.2, n: int = 8, seed: int = 3) -> tuple[float, float]:
    """(head error, face flux error) of the q = 0 MFD solve on a jittered grid."""
    mesh = build_perturbed_grid(n, n, 1.0, 1.0, jitter, rng_seed=seed)
    system = MfdSystem(mesh, [SATURATED], np.zeros(mesh.n_cells, int), _all_dirichlet(mesh), gamma_scale=gamma_scale)
    x, rep = newton_solve(system, system.initial_guess(), 0.0)
    p = system.heads(x)
    head_err = float(np.max(np.abs(p - exact_head(mesh.cell_centroid))))
    exact_u = -(mesh.face_normal @ (SATURATED.tensor2d() @ GRADIENT))
    flux_err = float(np.max(np.abs(system.physical_flux(x, 0.0) - exact_u)))
    return head_err, flux_err


def linear_scenario_error(n: int = 10) -> float:
    cfg = scenario_linear_verification(n)
    res = solve_config(cfg, write=False)
    if not res.converged:
        return float("inf")
    x = res.system.mesh.cell_centroid[:, 0]
    return float(np.max(np.abs(res.fields.h - linear_head(x))))


def _timed(name, fn, tol):
    t0 = time.perf_counter()
    value = fn()
    return Check(name, bool(value <= tol), value, tol, time.perf_counter() - t0)


def run_checks() -> list[Check]:
    checks = [
        _timed("TPFA linear patch test, head", tpfa_patch_error, 1e-10),
        _timed("linear verification scenario, head", linear_scenario_error, 1e-10),
    ]
    for factor in (1.0, 2.0):
        scale = factor * GAMMA_SCALE
        t0 = time.perf_counter()
        e_h, e_u = mfd_patch_errors(scale)
        dt = time.perf_counter() - t0
        checks.append(Check(f"MFD patch test (gamma x{factor:g}), head", e_h <= 1e-9, e_h, 1e-9, dt))
        checks.append(Check(f"MFD patch test (gamma x{factor:g}), flux", e_u <= 1e-9, e_u, 1e-9, dt))
    return checks
