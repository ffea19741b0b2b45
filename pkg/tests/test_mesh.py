import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from richcont.mesh import MeshError, assign_materials, build_perturbed_grid, build_structured_grid, mesh_from_polygons


def test_structured_counts_and_geometry():
    m = build_structured_grid(4, 3, 2.0, 1.5)
    assert m.n_cells == 12
    assert m.n_faces == 4 * 4 + 5 * 3  # horizontal + vertical faces
    assert m.n_nodes == 20
    np.testing.assert_allclose(m.cell_volume, 0.25)
    assert m.cell_volume.sum() == pytest.approx(3.0)
    assert len(m.boundary_faces) == 2 * 4 + 2 * 3
    for tag, count in {"left": 3, "right": 3, "bottom": 4, "top": 4}.items():
        assert len(m.faces_with_tag(tag)) == count


def test_boundary_normals_point_outward():
    m = build_structured_grid(3, 2, 1.0, 1.0, shear_slope=0.2, z0=1.0)
    for f in m.boundary_faces:
        c = m.face_cells[f, 0]
        assert np.dot(m.face_centroid[f] - m.cell_centroid[c], m.face_normal[f]) > 0
    expected = {"left": [-1, 0], "right": [1, 0], "top": [0, 1], "bottom": [0, -1]}
    for tag, n in expected.items():
        normals = m.face_normal[m.faces_with_tag(tag)]
        assert np.all(normals @ np.array(n, float) > 0.9), tag


def test_interior_orientation_first_cell_positive():
    m = build_perturbed_grid(5, 4, 1.0, 1.0, 0.3, rng_seed=1)
    for f in m.interior_faces:
        c1, c2 = m.face_cells[f]
        d = m.cell_centroid[c2] - m.cell_centroid[c1]
        assert np.dot(d, m.face_normal[f]) > 0
        k1 = list(m.cell_faces[c1]).index(f)
        k2 = list(m.cell_faces[c2]).index(f)
        assert m.cell_signs[c1][k1] == 1 and m.cell_signs[c2][k2] == -1


def test_shear_preserves_volume():
    # a sheared column keeps its vertical extent: area = Lx * Lz
    m = build_structured_grid(10, 4, 100.0, 1.0, shear_slope=-0.05, z0=5.0)
    assert m.cell_volume.sum() == pytest.approx(100.0, rel=1e-13)
    assert m.nodes[:, 1].max() == pytest.approx(6.0)
    assert m.nodes[:, 1].min() == pytest.approx(0.0)
    np.testing.assert_allclose(m.layer_coordinate(m.nodes).min(), 0.0, atol=1e-14)


@settings(max_examples=25, deadline=None)
@given(
    nx=st.integers(1, 7),
    nz=st.integers(1, 7),
    jitter=st.floats(0.0, 0.45),
    seed=st.integers(0, 1000),
    slope=st.floats(-0.3, 0.3),
)
def test_geometric_identities_on_random_grids(nx, nz, jitter, seed, slope):
    m = build_perturbed_grid(nx, nz, 2.0, 1.0, jitter, rng_seed=seed, shear_slope=slope)
    assert np.all(m.cell_volume > 0)
    assert m.cell_volume.sum() == pytest.approx(2.0, rel=1e-12)
    assert m.closedness_residual().max() < 1e-13
    assert m.linear_exactness_residual().max() < 1e-12
    assert np.allclose(np.linalg.norm(m.face_normal, axis=1), 1.0)


def test_perturbed_grid_is_reproducible_and_keeps_boundary():
    a = build_perturbed_grid(6, 6, 1.0, 1.0, 0.2, rng_seed=7)
    b = build_perturbed_grid(6, 6, 1.0, 1.0, 0.2, rng_seed=7)
    s = build_structured_grid(6, 6, 1.0, 1.0)
    assert np.array_equal(a.nodes, b.nodes)
    moved = np.any(a.nodes != s.nodes, axis=1)
    on_boundary = np.isclose(s.nodes[:, 0] % 1.0, 0) | np.isclose(s.nodes[:, 1] % 1.0, 0)
    assert not np.any(moved & on_boundary)
    assert moved.sum() > 20


def test_zero_jitter_equals_structured():
    a = build_perturbed_grid(3, 2, 1.0, 1.0, 0.0)
    s = build_structured_grid(3, 2, 1.0, 1.0)
    assert np.array_equal(a.nodes, s.nodes)


@pytest.mark.parametrize("jitter", [-0.1, 0.5, 0.8])
def test_jitter_out_of_range(jitter):
    with pytest.raises(MeshError):
        build_perturbed_grid(3, 3, 1.0, 1.0, jitter)


def test_bad_dimensions():
    with pytest.raises(MeshError):
        build_structured_grid(0, 3, 1.0, 1.0)
    with pytest.raises(MeshError):
        build_structured_grid(2, 3, 1.0, -1.0)


def test_clockwise_cell_rejected():
    nodes = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], float)
    with pytest.raises(MeshError):
        mesh_from_polygons(nodes, [[0, 3, 2, 1]], lambda mid, n: "side")


def test_single_triangle():
    nodes = np.array([[0, 0], [2, 0], [0, 1]], float)
    m = mesh_from_polygons(nodes, [[0, 1, 2]], lambda mid, n: "edge")
    assert m.n_faces == 3
    assert m.cell_volume[0] == pytest.approx(1.0)
    np.testing.assert_allclose(m.cell_centroid[0], [2 / 3, 1 / 3])
    assert m.closedness_residual()[0] < 1e-15


def test_assign_materials_first_match_and_coverage():
    m = build_structured_grid(4, 2, 4.0, 2.0)
    ids = assign_materials(m, [(lambda p: p[0] < 2.0, 0), (lambda p: p[1] > 1.0, 1), (lambda p: True, 2)])
    assert ids.tolist() == [0, 0, 2, 2, 0, 0, 1, 1]
    with pytest.raises(MeshError, match="cell 2"):
        assign_materials(m, [(lambda p: p[0] < 2.0, 0)])


def test_unknown_tag():
    m = build_structured_grid(2, 2, 1.0, 1.0)
    with pytest.raises(MeshError):
        m.faces_with_tag("north")
