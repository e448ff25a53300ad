import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stkde.domain import (
    OUT_OF_GRID,
    Bandwidths,
    DensitySurface,
    DensityVolume,
    GridSpec2D,
    GridSpec3D,
    Incident,
    LandUse,
    LandUseGrid,
    TimeWindow,
    ValidationError,
    as_points,
    voxel_centroid,
    world_to_voxel,
)

SPEC = GridSpec3D(0.0, 0.0, 100.0, 4, 6, 0.0, 1.0, 3)


def test_origin_maps_to_first_voxel():
    assert world_to_voxel((0.0, 0.0, 0.0), SPEC) == (0, 0, 0)


def test_centroid_formula():
    assert voxel_centroid(0, 0, 0, SPEC) == (50.0, 50.0, 0.5)
    assert voxel_centroid(1, 0, 0, SPEC) == (150.0, 50.0, 0.5)


def test_upper_edges_are_exclusive():
    assert world_to_voxel((400.0, 10.0, 0.5), SPEC) is OUT_OF_GRID
    assert world_to_voxel((10.0, 600.0, 0.5), SPEC) is OUT_OF_GRID
    assert world_to_voxel((10.0, 10.0, 3.0), SPEC) is OUT_OF_GRID
    assert world_to_voxel((-1e-9, 10.0, 0.5), SPEC) is OUT_OF_GRID
    assert world_to_voxel((np.nextafter(400.0, 0), 10.0, 0.5), SPEC) == (3, 0, 0)


def test_roundtrip_exhaustive():
    for i, j, k in itertools.product(range(4), range(6), range(3)):
        assert world_to_voxel(voxel_centroid(i, j, k, SPEC), SPEC) == (i, j, k)


def test_centroid_out_of_range_raises():
    with pytest.raises(IndexError):
        voxel_centroid(4, 0, 0, SPEC)
    with pytest.raises(IndexError):
        voxel_centroid(0, 0, -1, SPEC)


@given(st.floats(-1e5, 1e5), st.floats(-1e5, 1e5), st.floats(-1e3, 1e3),
       st.integers(0, 3), st.integers(0, 5), st.integers(0, 2),
       st.floats(0.01, 0.99), st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_translation_leaves_indices_unchanged(dx, dy, dt, i, j, k, fx, fy, ft):
    p = (100.0 * (i + fx), 100.0 * (j + fy), k + ft)
    moved = GridSpec3D(dx, dy, 100.0, 4, 6, dt, 1.0, 3)
    assert world_to_voxel((p[0] + dx, p[1] + dy, p[2] + dt), moved) == world_to_voxel(p, SPEC) == (i, j, k)


def test_spec_validation():
    with pytest.raises(ValidationError):
        GridSpec2D(0, 0, 0.0, 3, 3)
    with pytest.raises(ValidationError):
        GridSpec3D(0, 0, 10.0, 3, 3, 0.0, -1.0, 2)
    with pytest.raises(ValidationError):
        GridSpec2D(0, 0, 10.0, 0, 3)


def test_value_types_validate():
    with pytest.raises(ValidationError):
        Bandwidths(1.0, 0.0, 1.0)
    with pytest.raises(ValidationError):
        Bandwidths(1.0, float("inf"), 1.0)
    with pytest.raises(ValidationError):
        TimeWindow(2.0, 2.0)
    with pytest.raises(ValidationError):
        Incident("a", float("nan"), 0.0, 0.0)
    w = TimeWindow(0.0, 2.0)
    assert w.contains(0.0) and not w.contains(2.0)


def test_density_rasters_validate():
    with pytest.raises(ValidationError):
        DensityVolume(SPEC, np.zeros((4, 6, 2)))
    with pytest.raises(ValidationError):
        DensityVolume(SPEC, -np.ones(SPEC.shape))
    with pytest.raises(ValidationError):
        DensitySurface(SPEC.spatial, np.full(SPEC.spatial.shape, np.nan))


def test_landuse_area_and_validation(small_landuse):
    lu = small_landuse
    assert lu.study_cell_count == 25
    assert lu.study_area == 25 * 100.0 ** 2
    assert lu.eligible.sum() == 24
    with pytest.raises(ValidationError):
        LandUseGrid(lu.spec, np.zeros(lu.spec.shape, dtype=np.int8))


def test_as_points_is_canonical():
    incs = [Incident("b", 5.0, 1.0, 2.0), Incident("a", 1.0, 1.0, 2.0), Incident("c", 9.0, 9.0, 0.0)]
    pts = as_points(incs)
    np.testing.assert_array_equal(pts, [[9, 9, 0], [1, 1, 2], [5, 1, 2]])
    np.testing.assert_array_equal(as_points(incs[::-1]), pts)


def test_row_major_index():
    spec = GridSpec2D(0, 0, 1.0, 4, 3)
    assert spec.row_major_index(2, 1) == 6
    assert LandUse.OUTSIDE == -1 and LandUse.ELIGIBLE == 1
