import numpy as np
import pytest

from richcont.constitutive import VgmMaterial, kr_of_head
from richcont.fv_tpfa import (
    FaceApproximation,
    TpfaSystem,
    face_relperm,
    face_transmissibility,
    half_transmissibility,
    upwind_weight,
)
from richcont.mesh import build_structured_grid
from richcont.newton import newton_solve
from richcont.system import Dirichlet, Neumann

SAT = VgmMaterial(1.0, 1.0, 2.0, 0.05, 0.4, kr_override=1.0)
SOIL = VgmMaterial(2.0, 1.5, 1.8, 0.05, 0.4)


def test_half_transmissibility_unit_square():
    # area 1, K = I, centroid-to-face distance 1/2
    t = half_transmissibility(1.0, [1.0, 0.0], np.eye(2), [1.0, 0.5], [0.5, 0.5])
    assert t == pytest.approx(2.0)


def test_half_transmissibility_anisotropic_and_degenerate():
    K = np.diag([3.0, 5.0])
    assert half_transmissibility(2.0, [0.0, 1.0], K, [0.0, 1.0], [0.0, 0.5]) == pytest.approx(2 * 5 / 0.5)
    with pytest.raises(ValueError):
        half_transmissibility(1.0, [1.0, 0.0], K, [0.5, 0.7], [0.5, 0.5])


def test_harmonic_mean():
    assert face_transmissibility(2.0, 6.0) == pytest.approx(1.5)
    assert face_transmissibility(4.0, np.inf) == pytest.approx(4.0)


def test_upwind_rules():
    assert upwind_weight(2.0, 1.0) == 1.0
    assert upwind_weight(1.0, 2.0) == 0.0
    assert upwind_weight(1.0, 1.0) == 0.5
    assert face_relperm(2.0, 1.0, 0.3, 0.7) == pytest.approx(0.3)
    assert face_relperm(1.0, 2.0, 0.3, 0.7) == pytest.approx(0.7)
    assert face_relperm(1.0, 1.0, 0.3, 0.7) == pytest.approx(0.5)
    assert face_relperm(2.0, 1.0, 0.3, 0.7, FaceApproximation.CENTRAL) == pytest.approx(0.5)


def _column():
    mesh = build_structured_grid(1, 2, 1.0, 1.0)
    bc = {"bottom": Dirichlet(0.0), "top": Dirichlet(1.0), "left": Neumann(), "right": Neumann()}
    return mesh, bc


def test_two_cell_column_hand_solve():
    # boundary half-T = 1/0.25 = 4, interior T = harmonic(4, 4) = 2
    mesh, bc = _column()
    sys_ = TpfaSystem(mesh, [SAT], np.zeros(2, int), bc)
    A = sys_.jacobian(np.zeros(2), 0.0).toarray()
    np.testing.assert_allclose(A, [[6.0, -2.0], [-2.0, 6.0]])
    h, rep = newton_solve(sys_, sys_.initial_guess(), 0.0)
    assert rep.converged and rep.iterations == 1
    np.testing.assert_allclose(h, [0.25, 0.75], atol=1e-14)


def test_two_cell_residual_hand_value():
    # horizontal pair, Dirichlet on both ends; check F against a hand assembly
    mesh = build_structured_grid(2, 1, 2.0, 1.0)
    bc = {"left": Dirichlet(0.2), "right": Dirichlet(-0.1), "top": Neumann(0.5), "bottom": Neumann(0.0)}
    ids = np.zeros(2, int)
    sys_ = TpfaSystem(mesh, [SOIL], ids, bc)
    h = np.array([0.1, -0.3])
    q = 0.6
    z = 0.5
    kr = lambda hh: float(kr_of_head(SOIL, hh, z))
    T_int = 2.0  # half-T = area*K/dist = 1*2/0.5 = 4 on both sides, harmonic mean 2
    T_b = 4.0
    k01 = kr(0.1) ** q  # upwind: cell 0 has the larger head
    k_left = kr(0.2) ** q  # boundary head larger than cell head
    k_right = kr(-0.1) ** q
    F0 = k01 * T_int * (0.1 + 0.3) + k_left * T_b * (0.1 - 0.2) - 0.5 * 1.0
    F1 = -k01 * T_int * (0.1 + 0.3) + k_right * T_b * (-0.3 + 0.1) - 0.5 * 1.0
    np.testing.assert_allclose(sys_.residual(h, q), [F0, F1], rtol=1e-13)


def test_hydrostatic_state_is_exact():
    mesh = build_structured_grid(5, 4, 3.0, 2.0, shear_slope=0.1)
    bc = {"left": Dirichlet(1.3), "bottom": Dirichlet(1.3), "top": Neumann(0.0), "right": Neumann(0.0)}
    sys_ = TpfaSystem(mesh, [SOIL], np.zeros(mesh.n_cells, int), bc)
    for q in (0.0, 0.4, 1.0):
        assert np.abs(sys_.residual(np.full(mesh.n_cells, 1.3), q)).max() < 1e-15


def test_residual_sum_telescopes(rng):
    mesh = build_structured_grid(6, 5, 3.0, 2.0, shear_slope=-0.1, z0=1.0)
    bc = {"left": Dirichlet(0.5), "bottom": Dirichlet(0.0), "top": Neumann(0.01), "right": Neumann(0.0)}
    src = rng.uniform(-0.01, 0.01, mesh.n_cells)
    sys_ = TpfaSystem(mesh, [SOIL], np.zeros(mesh.n_cells, int), bc, sources=src)
    h = rng.uniform(-1.0, 1.0, mesh.n_cells)
    F = sys_.residual(h, 0.7)
    outflow = -sys_.boundary_inflow(h, 0.7)
    assert F.sum() == pytest.approx(outflow - sys_.total_source(), abs=1e-13)


@pytest.mark.parametrize("approx", list(FaceApproximation))
@pytest.mark.parametrize("q", [0.3, 1.0])
def test_jacobian_matches_directional_differences(rng, approx, q):
    mesh = build_structured_grid(8, 6, 4.0, 1.0, shear_slope=-0.05, z0=0.25)
    ids = (mesh.layer_coordinate(mesh.cell_centroid) < 0.5).astype(int)
    gravel = VgmMaterial(8640.0, 490.0, 2.19, 0.011, 0.42)
    sand = VgmMaterial(18.144, 3.9, 5.74, 0.154, 0.39)
    bc = {"top": Neumann(0.0048), "bottom": Dirichlet(0.0), "right": Dirichlet(0.0), "left": Neumann(0.0)}
    sys_ = TpfaSystem(mesh, [sand, gravel], ids, bc, approximation=approx)
    # heads in a range where Kr varies smoothly and no face is a tie
    h = mesh.cell_centroid[:, 1] + rng.uniform(-0.4, -0.05, mesh.n_cells)
    v = rng.normal(size=mesh.n_cells)
    eps = 1e-7
    fd = (sys_.residual(h + eps * v, q) - sys_.residual(h - eps * v, q)) / (2 * eps)
    Jv = sys_.jacobian(h, q) @ v
    assert np.linalg.norm(fd - Jv) <= 1e-6 * np.linalg.norm(Jv)


def test_linear_patch_unsheared():
    mesh = build_structured_grid(7, 5, 2.0, 1.0)
    exact = lambda p: 0.3 + 0.8 * p[:, 0] - 0.4 * p[:, 1]
    bc = {t: Dirichlet(exact) for t in mesh.boundary_tags}
    sys_ = TpfaSystem(mesh, [SOIL], np.zeros(mesh.n_cells, int), bc)
    h, rep = newton_solve(sys_, sys_.initial_guess(), 0.0)
    assert np.abs(h - exact(mesh.cell_centroid)).max() <= 1e-10


def test_neumann_flux_enters_the_domain():
    mesh, _ = _column()
    bc = {"bottom": Dirichlet(0.0), "top": Neumann(2.0), "left": Neumann(), "right": Neumann()}
    sys_ = TpfaSystem(mesh, [SAT], np.zeros(2, int), bc)
    h, rep = newton_solve(sys_, sys_.initial_guess(), 0.0)
    # 2 m/day in through the top leaves through the bottom: K dh/dz = -2
    assert sys_.boundary_inflow(h, 0.0) == pytest.approx(0.0, abs=1e-13)
    flux = sys_.face_fluxes(h, 0.0)
    bottom = mesh.faces_with_tag("bottom")
    assert flux[bottom].sum() == pytest.approx(2.0)
    np.testing.assert_allclose(h, [0.5, 1.5])


def test_validation():
    mesh, bc = _column()
    with pytest.raises(ValueError):
        TpfaSystem(mesh, [SAT], np.zeros(3, int), bc)
    with pytest.raises(ValueError):
        TpfaSystem(mesh, [SAT], np.zeros(2, int), {**bc, "north": Neumann()})
    with pytest.raises(ValueError):
        TpfaSystem(mesh, [SAT], np.zeros(2, int), {"bottom": Dirichlet(0.0)})
    sys_ = TpfaSystem(mesh, [SAT], np.zeros(2, int), bc)
    with pytest.raises(ValueError):
        sys_.residual(np.zeros(3), 0.5)
