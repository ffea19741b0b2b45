"""Run a scenario end to end and compare schemes and predictors."""

from __future__ import annotations

import csv
import dataclasses
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .. import constitutive as C
from ..continuation import ContinuationFailure, ContinuationTrace, continuation_solve
from ..fv_tpfa import TpfaSystem
from ..mesh import assign_materials
from ..mfd import MfdSystem
from ..newton import newton_solve
from .config import ConfigError, ScenarioConfig, save_config
from .vtk import write_cell_vtk, write_face_vtk

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1


def build_system(cfg: ScenarioConfig):
    """Mesh, material ids and discrete system described by ``cfg``."""
    mesh = cfg.mesh.build()
    rules = [(r.predicate(mesh), cfg.material_index(r.material)) for r in cfg.regions]
    ids = assign_materials(mesh, rules)
    common = dict(sources=cfg.source, kind=cfg.continuation.kind, kr_floor=cfg.kr_floor)
    if cfg.scheme == "tpfa":
        return TpfaSystem(mesh, cfg.material_list, ids, cfg.boundary, approximation=cfg.approximation, **common)
    if cfg.approximation != "upwind":
        raise ConfigError("the MFD scheme only implements upwind relative permeability")
    return MfdSystem(mesh, cfg.material_list, ids, cfg.boundary, gamma_scale=cfg.mfd_gamma_scale,
                     upwind=cfg.mfd_upwind, **common)


@dataclass
class FieldOutput:
    """Cell and face fields of a solution.

    ``face_flux`` is the Darcy flux in m^3/day (unit thickness) along each
    face's stored normal; ``face_flux_density`` divides it by the face area.
    """

    h: np.ndarray
    psi: np.ndarray
    theta: np.ndarray
    se: np.ndarray
    kr: np.ndarray
    material: np.ndarray
    face_flux: np.ndarray
    face_flux_density: np.ndarray

    def cell_fields(self) -> dict[str, np.ndarray]:
        return {"head": self.h, "pressure_head": self.psi, "water_content": self.theta,
                "saturation": self.se, "relperm": self.kr, "material": self.material.astype(float)}

    def face_fields(self) -> dict[str, np.ndarray]:
        return {"flux": self.face_flux, "flux_density": self.face_flux_density}


def compute_fields(system, x: np.ndarray, q: float = 1.0) -> FieldOutput:
    mesh = system.mesh
    p = system.params
    h = system.heads(x)
    psi = h - mesh.cell_centroid[:, 1]
    theta = np.asarray(C.water_content(p, psi), dtype=float)
    se = np.clip((theta - p.theta_r) / (p.theta_s - p.theta_r), 0.0, 1.0)
    kr = np.asarray(C.kr_of_psi(p, psi, system.kr_floor), dtype=float)
    flux = system.face_fluxes(x, q)
    return FieldOutput(h, psi, theta, se, kr, system.cell_material.copy(), flux, flux / mesh.face_area)


@dataclass(frozen=True)
class MassBalance:
    net_outflow: float  # m^3/day through the boundary
    sources: float  # m^3/day
    gross_inflow: float

    @property
    def imbalance(self) -> float:
        return self.net_outflow - self.sources

    @property
    def relative(self) -> float:
        return abs(self.imbalance) / self.gross_inflow if self.gross_inflow > 0 else abs(self.imbalance)


def mass_balance(system, x: np.ndarray, q: float = 1.0) -> MassBalance:
    flux = system.face_fluxes(x, q)[system.mesh.boundary_faces]
    src = system.sources * system.mesh.cell_volume
    gross = float(np.clip(-flux, 0.0, None).sum() + np.clip(src, 0.0, None).sum())
    return MassBalance(float(flux.sum()), float(src.sum()), gross)


@dataclass
class RunResult:
    config: ScenarioConfig
    status: int
    trace: ContinuationTrace
    message: str
    x: Optional[np.ndarray] = None
    fields: Optional[FieldOutput] = None
    balance: Optional[MassBalance] = None
    out_dir: Optional[Path] = None
    system: object = None
    polish_iterations: int = 0

    @property
    def converged(self) -> bool:
        return self.status == EXIT_OK

    def summary(self) -> str:
        c = self.config
        t = self.trace
        parts = [
            f"scenario={c.name}", f"scheme={c.scheme}", f"predictor={c.continuation.predictor_order}",
            f"status={'converged' if self.converged else 'failed'}", f"q={t.q_reached:.6g}",
            f"steps={t.successful_steps}({t.failed_steps})", f"newton={t.newton_iterations}",
            f"time={t.total_time:.2f}s",
        ]
        if self.polish_iterations:
            parts.append(f"polish={self.polish_iterations}")
        if self.balance is not None:
            parts.append(f"mass_balance={self.balance.relative:.3e}")
        if not self.converged:
            parts.append(f"reason={self.message!r}")
        return " ".join(parts)


def polish(system, x: np.ndarray, cfg: ScenarioConfig) -> tuple[np.ndarray, int]:
    """Extra Newton iterations at q = 1 down to ``cfg.polish_tol``.

    The continuation tolerances are loose enough that the boundary fluxes of
    an accepted solution can miss the inflow by more than the mass-balance
    target; a few quadratically converging iterations fix that. A polish
    that does not reduce the residual is discarded.
    """
    if cfg.polish_tol <= 0.0:
        return x, 0
    base = cfg.continuation.newton
    params = dataclasses.replace(base, eps_abs=cfg.polish_tol, eps_rel=1e-300, linesearch_skip=0)
    y, rep = newton_solve(system, x, 1.0, params)
    if not rep.converged:
        log.warning("polish stopped (%s) at |F| = %.3e", rep.failure, rep.residual_history[-1])
        if rep.residual_history[-1] >= rep.residual_history[0]:
            return x, rep.iterations
    return y, rep.iterations


def solve_config(cfg: ScenarioConfig, out_dir=None, write: bool = True) -> RunResult:
    """Run continuation for ``cfg``; outputs go to ``out_dir`` (default ``cfg.output_dir``)."""
    system = build_system(cfg)
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    try:
        x, trace = continuation_solve(system, cfg.continuation)
        x, n_polish = polish(system, x, cfg)
        res = RunResult(cfg, EXIT_OK, trace, "converged", x=x, system=system, polish_iterations=n_polish)
        res.fields = compute_fields(system, x)
        res.balance = mass_balance(system, x)
    except ContinuationFailure as exc:
        res = RunResult(cfg, EXIT_FAILED, exc.trace, str(exc), x=exc.x, system=system)
    if write:
        out.mkdir(parents=True, exist_ok=True)
        res.out_dir = out
        res.trace.write_csv(out / "trace.csv")
        save_config(cfg, out / "config.ini")
        if res.fields is not None:
            write_cell_vtk(out / "cells.vtk", system.mesh, res.fields.cell_fields(), f"{cfg.name} cells")
            write_face_vtk(out / "faces.vtk", system.mesh, res.fields.face_fields(), f"{cfg.name} faces")
        (out / "summary.txt").write_text(res.summary() + "\n")
    log.info("%s", res.summary())
    return res


def run(cfg: ScenarioConfig, out_dir=None) -> int:
    """Solve, write fields, trace and summary; return the process exit status."""
    res = solve_config(cfg, out_dir)
    print(res.summary())
    return res.status


# comparison -----------------------------------------------------------------

COMPARE_COLUMNS = ["scheme", "predictor", "wall_time", "successful_steps", "failed_steps",
                   "newton_iterations", "status"]


@dataclass(frozen=True)
class ComparisonRow:
    scheme: str
    predictor: int
    wall_time: float
    successful_steps: int
    failed_steps: int
    newton_iterations: int
    status: str


@dataclass
class Comparison:
    rows: list[ComparisonRow]
    results: list[RunResult]

    def row(self, scheme: str, predictor: int) -> ComparisonRow:
        for r in self.rows:
            if r.scheme == scheme and r.predictor == predictor:
                return r
        raise KeyError((scheme, predictor))

    def text(self) -> str:
        head = ["scheme", "predictor", "T, s", "successful (failed) steps", "Newton iterations", "status"]
        body = [[r.scheme, str(r.predictor), f"{r.wall_time:.2f}", f"{r.successful_steps} ({r.failed_steps})",
                 str(r.newton_iterations), r.status] for r in self.rows]
        widths = [max(len(row[i]) for row in [head, *body]) for i in range(len(head))]
        fmt = lambda row: "  ".join(v.rjust(w) if i else v.ljust(w) for i, (v, w) in enumerate(zip(row, widths)))
        lines = [fmt(head), "  ".join("-" * w for w in widths)] + [fmt(r) for r in body]
        return "\n".join(lines) + "\n"

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "comparison.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(COMPARE_COLUMNS)
            for r in self.rows:
                w.writerow([r.scheme, r.predictor, f"{r.wall_time:.4f}", r.successful_steps, r.failed_steps,
                            r.newton_iterations, r.status])
        (out / "comparison.txt").write_text(self.text())


def _variant(cfg: ScenarioConfig, scheme: str, order: int) -> ScenarioConfig:
    cont = dataclasses.replace(cfg.continuation, predictor_order=order)
    return cfg.with_(scheme=scheme, continuation=cont)


def _solve_variant(args):
    cfg, out = args
    res = solve_config(cfg, out)
    res.system = None  # meshes and factorizations stay in the worker
    return res


def compare(
    cfg: ScenarioConfig,
    schemes: Sequence[str] = ("tpfa", "mfd"),
    orders: Sequence[int] = (0, 1),
    out_dir=None,
    workers: int = 1,
) -> Comparison:
    """Run every (scheme, predictor) pair; each writes to ``<out>/<scheme>_p<order>``."""
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    jobs = [(_variant(cfg, s, o), out / f"{s}_p{o}") for s in schemes for o in orders]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_solve_variant, jobs))
    else:
        results = [_solve_variant(j) for j in jobs]
    rows = [
        ComparisonRow(r.config.scheme, r.config.continuation.predictor_order, r.trace.total_time,
                      r.trace.successful_steps, r.trace.failed_steps, r.trace.newton_iterations,
                      "converged" if r.converged else "failed")
        for r in results
    ]
    table = Comparison(rows, results)
    table.write(out)
    return table
