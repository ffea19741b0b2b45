"""Declarative scenario definition and its INI-style text format.

Example::

    [scenario]
    name = capillary_barrier
    scheme = tpfa
    approximation = upwind
    source = 0.0
    output_dir = out

    [mesh]
    nx = 100
    nz = 16
    Lx = 100.0
    Lz = 1.0
    shear_slope = -0.05
    z0 = 5.0
    jitter = 0.0
    seed = 0

    [material.sand]
    K = 18.144
    alpha = 3.9
    n = 5.74
    theta_r = 0.154
    theta_s = 0.39

    [region.0]
    material = sand
    layer_min = 0.5

    [bc.top]
    type = neumann
    flux = 0.0048

    [bc.bottom]
    type = dirichlet
    head = 0.0

    [continuation]
    predictor_order = 1
    kind = power

    [newton]
    eps_rel = 1e-05
    maxit = 25

Region rules are tried in section order; bounds left out are unbounded.
``layer_min``/``layer_max`` bound the height above the (sheared) grid
bottom, so bands defined with them follow the incline. Units are m and
m/day throughout.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..constitutive import KR_FLOOR, ContinuationKind, VgmMaterial
from ..continuation import ContinuationParams
from ..mesh import Mesh, build_perturbed_grid
from ..mfd import GAMMA_SCALE
from ..newton import NewtonParams
from ..system import BoundaryCondition, Dirichlet, Neumann


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class MeshSpec:
    nx: int
    nz: int
    Lx: float
    Lz: float
    shear_slope: float = 0.0
    z0: float = 0.0
    jitter: float = 0.0
    seed: int = 0

    def build(self) -> Mesh:
        return build_perturbed_grid(
            self.nx, self.nz, self.Lx, self.Lz, self.jitter, self.seed, self.shear_slope, self.z0
        )


@dataclass(frozen=True)
class RegionRule:
    material: str
    x_min: Optional[float] = None
    x_max: Optional[float] = None
    z_min: Optional[float] = None
    z_max: Optional[float] = None
    layer_min: Optional[float] = None
    layer_max: Optional[float] = None

    def predicate(self, mesh: Mesh):
        def accepts(point) -> bool:
            x, z = float(point[0]), float(point[1])
            layer = z - mesh.z0 - mesh.shear_slope * x
            for v, lo, hi in ((x, self.x_min, self.x_max), (z, self.z_min, self.z_max),
                              (layer, self.layer_min, self.layer_max)):
                if lo is not None and v < lo:
                    return False
                if hi is not None and v >= hi:
                    return False
            return True

        return accepts


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    mesh: MeshSpec
    materials: dict[str, VgmMaterial]
    regions: list[RegionRule]
    boundary: dict[str, BoundaryCondition]
    continuation: ContinuationParams = ContinuationParams()
    scheme: str = "tpfa"
    approximation: str = "upwind"
    source: float = 0.0
    kr_floor: float = KR_FLOOR
    polish_tol: float = 1e-10
    mfd_gamma_scale: float = GAMMA_SCALE
    mfd_upwind: str = "flux"
    output_dir: str = "out"

    def __post_init__(self):
        if self.scheme not in ("tpfa", "mfd"):
            raise ConfigError(f"scheme must be tpfa or mfd, got {self.scheme!r}")
        if self.approximation not in ("upwind", "central"):
            raise ConfigError(f"approximation must be upwind or central, got {self.approximation!r}")
        if self.mfd_upwind not in ("flux", "head"):
            raise ConfigError(f"mfd_upwind must be flux or head, got {self.mfd_upwind!r}")
        if not self.mfd_gamma_scale > 0.0:
            raise ConfigError("mfd_gamma_scale must be positive")
        for rule in self.regions:
            if rule.material not in self.materials:
                raise ConfigError(f"region refers to unknown material {rule.material!r}")

    @property
    def material_list(self) -> list[VgmMaterial]:
        return list(self.materials.values())

    def material_index(self, name: str) -> int:
        return list(self.materials).index(name)

    def with_(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


# serialization ------------------------------------------------------------

_NEWTON_FIELDS = {f.name: f.type for f in dataclasses.fields(NewtonParams)}


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return " ".join(repr(float(x)) for x in v)
    return str(v)


def to_ini(cfg: ScenarioConfig) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp["scenario"] = {
        "name": cfg.name, "scheme": cfg.scheme, "approximation": cfg.approximation,
        "source": _fmt(cfg.source), "kr_floor": _fmt(cfg.kr_floor),
        "polish_tol": _fmt(cfg.polish_tol), "mfd_gamma_scale": _fmt(cfg.mfd_gamma_scale),
        "mfd_upwind": cfg.mfd_upwind, "output_dir": cfg.output_dir,
    }
    cp["mesh"] = {f.name: _fmt(getattr(cfg.mesh, f.name)) for f in dataclasses.fields(MeshSpec)}
    for name, mat in cfg.materials.items():
        sec = {
            "K": _fmt(mat.K if isinstance(mat.K, tuple) else float(mat.K)),
            "alpha": _fmt(float(mat.alpha)), "n": _fmt(float(mat.n)),
            "theta_r": _fmt(float(mat.theta_r)), "theta_s": _fmt(float(mat.theta_s)),
        }
        if mat.kr_override is not None:
            sec["kr_override"] = _fmt(float(mat.kr_override))
        cp[f"material.{name}"] = sec
    for i, rule in enumerate(cfg.regions):
        sec = {"material": rule.material}
        for f in dataclasses.fields(RegionRule)[1:]:
            v = getattr(rule, f.name)
            if v is not None:
                sec[f.name] = _fmt(float(v))
        cp[f"region.{i}"] = sec
    for tag, cond in cfg.boundary.items():
        if isinstance(cond, Dirichlet):
            if callable(cond.head):
                raise ConfigError(f"boundary {tag!r}: only constant heads can be serialized")
            cp[f"bc.{tag}"] = {"type": "dirichlet", "head": _fmt(float(cond.head))}
        else:
            cp[f"bc.{tag}"] = {"type": "neumann", "flux": _fmt(float(cond.flux))}
    c = cfg.continuation
    cp["continuation"] = {
        "predictor_order": str(c.predictor_order), "dq_min": _fmt(c.dq_min),
        "delta": _fmt(c.delta), "kind": c.kind.value,
    }
    cp["newton"] = {k: _fmt(getattr(c.newton, k)) for k in _NEWTON_FIELDS}
    lines = []
    for sec in cp.sections():
        lines.append(f"[{sec}]")
        lines.extend(f"{k} = {v}" for k, v in cp[sec].items())
        lines.append("")
    return "\n".join(lines)


def _float(sec, key, default=None):
    if key not in sec:
        if default is None:
            raise ConfigError(f"[{sec.name}] missing {key!r}")
        return default
    try:
        return float(sec[key])
    except ValueError:
        raise ConfigError(f"[{sec.name}] {key} = {sec[key]!r} is not a number") from None


def from_ini(text: str) -> ScenarioConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp.read_string(text)
    if "scenario" not in cp or "mesh" not in cp:
        raise ConfigError("config needs [scenario] and [mesh] sections")
    s = cp["scenario"]
    m = cp["mesh"]
    mesh = MeshSpec(
        nx=int(m["nx"]), nz=int(m["nz"]), Lx=_float(m, "Lx"), Lz=_float(m, "Lz"),
        shear_slope=_float(m, "shear_slope", 0.0), z0=_float(m, "z0", 0.0),
        jitter=_float(m, "jitter", 0.0), seed=int(m.get("seed", "0")),
    )
    materials: dict[str, VgmMaterial] = {}
    regions: list[RegionRule] = []
    boundary: dict[str, BoundaryCondition] = {}
    for name in cp.sections():
        sec = cp[name]
        if name.startswith("material."):
            key = name.split(".", 1)[1]
            kvals = [float(v) for v in sec["K"].split()]
            K = kvals[0] if len(kvals) == 1 else tuple(kvals)
            ov = _float(sec, "kr_override") if "kr_override" in sec else None
            try:
                materials[key] = VgmMaterial(
                    K, _float(sec, "alpha"), _float(sec, "n"), _float(sec, "theta_r"),
                    _float(sec, "theta_s"), name=key, kr_override=ov,
                )
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        elif name.startswith("region."):
            kw = {k: float(v) for k, v in sec.items() if k != "material"}
            regions.append(RegionRule(material=sec["material"], **kw))
        elif name.startswith("bc."):
            tag = name.split(".", 1)[1]
            kind = sec.get("type", "").lower()
            if kind == "dirichlet":
                boundary[tag] = Dirichlet(_float(sec, "head"))
            elif kind == "neumann":
                boundary[tag] = Neumann(_float(sec, "flux", 0.0))
            else:
                raise ConfigError(f"[{name}] type must be dirichlet or neumann")
    c = cp["continuation"] if "continuation" in cp else {}
    n = cp["newton"] if "newton" in cp else {}
    newton_kw = {}
    for k, typ in _NEWTON_FIELDS.items():
        if k in n:
            newton_kw[k] = int(n[k]) if typ in ("int", int) else float(n[k])
    cont = ContinuationParams(
        predictor_order=int(c.get("predictor_order", "1")),
        dq_min=float(c.get("dq_min", "1e-4")),
        delta=float(c.get("delta", "1e-7")),
        kind=ContinuationKind(c.get("kind", "power")),
        newton=NewtonParams(**newton_kw),
    )
    return ScenarioConfig(
        name=s.get("name", "scenario"), mesh=mesh, materials=materials, regions=regions,
        boundary=boundary, continuation=cont, scheme=s.get("scheme", "tpfa"),
        approximation=s.get("approximation", "upwind"), source=float(s.get("source", "0.0")),
        kr_floor=float(s.get("kr_floor", repr(KR_FLOOR))),
        polish_tol=float(s.get("polish_tol", "1e-10")),
        mfd_gamma_scale=float(s.get("mfd_gamma_scale", repr(GAMMA_SCALE))),
        mfd_upwind=s.get("mfd_upwind", "flux"), output_dir=s.get("output_dir", "out"),
    )


def load_config(path) -> ScenarioConfig:
    return from_ini(Path(path).read_text())


def save_config(cfg: ScenarioConfig, path) -> None:
    Path(path).write_text(to_ini(cfg))
