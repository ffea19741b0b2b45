"""Built-in scenarios: the capillary barrier, a repository cross-section, and
a saturated verification problem with a known linear solution."""

from __future__ import annotations

from ..constitutive import ContinuationKind, VgmMaterial
from ..continuation import ContinuationParams
from ..newton import NewtonParams
from ..system import Dirichlet, Neumann
from .config import MeshSpec, RegionRule, ScenarioConfig

# Capillary barrier media, K in m/day, alpha in 1/m.
CAPILLARY_SAND = VgmMaterial(18.144, 3.9, 5.74, 0.154, 0.39, name="sand")
CAPILLARY_GRAVEL = VgmMaterial(8640.0, 490.0, 2.19, 0.011, 0.42, name="gravel")

# Repository cross-section media.
REALISTIC_MATERIALS = {
    "clay": VgmMaterial(0.048, 0.8, 1.09, 0.068, 0.38, name="clay"),
    "soil": VgmMaterial(0.1, 5.9, 3.0, 0.1, 0.35, name="soil"),
    "gravel": VgmMaterial(100.0, 6.0, 3.0, 0.04, 0.3, name="gravel"),
    "clay_loam": VgmMaterial(0.2496, 3.6, 1.56, 0.078, 0.43, name="clay_loam"),
    "sand": VgmMaterial(7.128, 14.5, 2.68, 0.045, 0.43, name="sand"),
    "repository": VgmMaterial(0.1, 14.5, 3.0, 0.045, 0.4, name="repository"),
}

ALL_MATERIALS = [CAPILLARY_SAND, CAPILLARY_GRAVEL, *REALISTIC_MATERIALS.values()]

CAPILLARY_INFILTRATION = 0.0048  # m/day
REALISTIC_RECHARGE = 1e-4  # m/day
REALISTIC_HEAD = 0.5  # m

DESK_SCALE = 0.5


def scenario_capillary_barrier(scale: float = DESK_SCALE) -> ScenarioConfig:
    """Two 0.5 m layers (sand over gravel) dipping at 5 % over 100 m.

    The package is a sheared grid whose bottom edge runs from z = 5 at x = 0
    to z = 0 at x = 100, so the domain spans about 100 m by 6 m. ``scale = 1``
    gives 200 x 16 = 3200 cells; the default desk scale halves the columns.
    """
    nx = max(1, round(200 * scale))
    return ScenarioConfig(
        name="capillary_barrier",
        mesh=MeshSpec(nx=nx, nz=16, Lx=100.0, Lz=1.0, shear_slope=-0.05, z0=5.0),
        materials={"sand": CAPILLARY_SAND, "gravel": CAPILLARY_GRAVEL},
        regions=[RegionRule("sand", layer_min=0.5), RegionRule("gravel")],
        boundary={
            "top": Neumann(CAPILLARY_INFILTRATION),
            "bottom": Dirichlet(0.0),
            "right": Dirichlet(0.0),
            "left": Neumann(0.0),
        },
        continuation=ContinuationParams(
            predictor_order=1,
            kind=ContinuationKind.POWER,
            newton=NewtonParams(eps_rel=1e-5, eps_abs=1e-5, maxit=25),
        ),
        scheme="tpfa",
        approximation="upwind",
        output_dir="out/capillary_barrier",
    )


def scenario_realistic(scale: float = 1.0) -> ScenarioConfig:
    """Simplified near-surface repository section, 90 m by 12 m.

    Layering from the bottom: clay (0-3 m), sand (3-4.8 m), then clay loam
    fill up to 11 m containing the repository body (x 30-60 m, z 5.4-9 m)
    wrapped in a gravel shell, and a 1 m soil cover. The default
    140 x 20 grid has 2800 cells.
    """
    nx = max(1, round(140 * scale))
    nz = max(1, round(20 * scale))
    return ScenarioConfig(
        name="realistic",
        mesh=MeshSpec(nx=nx, nz=nz, Lx=90.0, Lz=12.0),
        materials=dict(REALISTIC_MATERIALS),
        regions=[
            RegionRule("soil", z_min=11.0),
            RegionRule("repository", x_min=30.0, x_max=60.0, z_min=5.4, z_max=9.0),
            RegionRule("gravel", x_min=28.5, x_max=61.5, z_min=4.8, z_max=9.6),
            RegionRule("clay_loam", z_min=4.8),
            RegionRule("sand", z_min=3.0),
            RegionRule("clay"),
        ],
        boundary={
            "top": Neumann(REALISTIC_RECHARGE),
            "bottom": Dirichlet(REALISTIC_HEAD),
            "left": Dirichlet(REALISTIC_HEAD),
            "right": Dirichlet(REALISTIC_HEAD),
        },
        continuation=ContinuationParams(
            predictor_order=1,
            kind=ContinuationKind.POWER,
            newton=NewtonParams(eps_rel=1e-4, eps_abs=1e-4, maxit=20),
        ),
        scheme="tpfa",
        approximation="upwind",
        output_dir="out/realistic",
    )


def linear_head(x, h_left: float = 1.0, h_right: float = 0.0, length: float = 1.0):
    return h_left + (h_right - h_left) * x / length


def scenario_linear_verification(n: int = 10) -> ScenarioConfig:
    """Saturated unit square, heads 1 (left) and 0 (right), no-flow top and bottom.

    Kr is overridden to 1 so the problem is linear for every q and the exact
    head is h = 1 - x.
    """
    mat = VgmMaterial(1.0, 1.0, 2.0, 0.05, 0.4, name="saturated", kr_override=1.0)
    return ScenarioConfig(
        name="linear_verification",
        mesh=MeshSpec(nx=n, nz=n, Lx=1.0, Lz=1.0),
        materials={"saturated": mat},
        regions=[RegionRule("saturated")],
        boundary={
            "left": Dirichlet(1.0),
            "right": Dirichlet(0.0),
            "top": Neumann(0.0),
            "bottom": Neumann(0.0),
        },
        output_dir="out/linear_verification",
    )


SCENARIOS = {
    "capillary": scenario_capillary_barrier,
    "realistic": scenario_realistic,
    "linear": lambda scale=1.0: scenario_linear_verification(max(2, round(10 * scale))),
}
