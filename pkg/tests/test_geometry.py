import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from shapely.geometry import Point, Polygon

from hybridmimo.errors import EmptyGridError, InvalidParameterError
from hybridmimo.geometry import (
    SPEED_OF_LIGHT,
    build_array,
    build_layout,
    build_observation_grid,
    departure_angles,
    departure_geometry,
    read_points_csv,
    write_points_csv,
)

LAM = SPEED_OF_LIGHT / 2e9


def test_baseline_array_pitch():
    arr = build_array(4, 12, 2e9)
    assert arr.num_elements == 48
    assert arr.wavelength == pytest.approx(0.14990, abs=1e-5)
    pos = arr.element_positions
    # column c, row r -> index c*12 + r
    dy = pos[12, 1] - pos[0, 1]
    assert dy == pytest.approx(0.0749, abs=1e-4)
    assert abs(dy - LAM / 2) < 1e-12
    for c in range(4):
        col = pos[c * 12:(c + 1) * 12]
        assert np.all(np.abs(np.diff(col[:, 2]) - 0.7 * LAM) < 1e-12)
        assert np.all(np.abs(col[:, 1] - col[0, 1]) < 1e-12)
    for c in range(3):
        assert abs(pos[(c + 1) * 12, 1] - pos[c * 12, 1] - LAM / 2) < 1e-12


def test_centroid_at_origin():
    for cols, rows in [(4, 12), (3, 5), (1, 7), (2, 2)]:
        arr = build_array(cols, rows, 2e9)
        assert np.all(np.abs(arr.element_positions.mean(axis=0)) < 1e-12)


def test_single_element():
    arr = build_array(1, 1, 2e9)
    assert arr.element_positions.shape == (1, 3)
    assert np.all(arr.element_positions == 0.0)


def test_stagger_2x2():
    pos = build_array(2, 2, 2e9).element_positions
    # column 1 (indices 2, 3) sits 0.35 lambda above column 0 (indices 0, 1)
    assert pos[2, 2] - pos[0, 2] == pytest.approx(0.35 * LAM, abs=1e-12)
    assert pos[3, 2] - pos[1, 2] == pytest.approx(0.35 * LAM, abs=1e-12)
    assert pos[1, 2] - pos[0, 2] == pytest.approx(0.7 * LAM, abs=1e-12)


@pytest.mark.parametrize("args", [(0, 12, 2e9), (4, 0, 2e9), (4, 12, 0.0), (4, 12, -1.0), (-1, 3, 1e9)])
def test_array_rejects_bad_parameters(args):
    with pytest.raises(InvalidParameterError):
        build_array(*args)


def test_layout_neighbor_distance_and_boresights():
    layout = build_layout()
    sites = layout.site_positions
    assert sites.shape == (19, 2)
    assert np.all(sites[0] == 0)
    d = np.linalg.norm(sites[1:7], axis=1)
    assert np.all(np.abs(d - 1732.0) < 1e-9)
    # every site's nearest neighbor is one ISD away
    dd = np.linalg.norm(sites[:, None] - sites[None], axis=2)
    np.fill_diagonal(dd, np.inf)
    assert np.all(np.abs(dd.min(axis=1) - 1732.0) < 1e-9)
    b = np.array(layout.boresight_azimuths)
    assert np.allclose(np.diff(b), 120.0)
    assert layout.cell_radius == pytest.approx(1000.0, rel=1e-4)


def test_sector_polygon_is_a_third_of_the_hexagon():
    layout = build_layout()
    hex_area = 1.5 * math.sqrt(3) * layout.cell_radius**2
    for s in range(3):
        poly = Polygon(layout.sector_polygon(s))
        assert poly.is_valid
        assert poly.area == pytest.approx(hex_area / 3, rel=1e-12)
    # sectors of one site tile its hexagon without overlap
    p0, p1 = Polygon(layout.sector_polygon(0)), Polygon(layout.sector_polygon(1))
    assert p0.intersection(p1).area < 1e-6


def _oracle_count(layout, sector, spacing, n_heights, min_dist):
    """Brute-force lattice scan with shapely's point-in-polygon."""
    poly = Polygon(layout.sector_polygon(sector)).buffer(1e-6)
    site = layout.sector_site(sector)
    n = int(2 * layout.cell_radius / spacing) + 2
    count = 0
    for i in range(-n, n + 1):
        for j in range(-n, n + 1):
            x, y = i * spacing, j * spacing
            if math.hypot(x, y) >= min_dist and poly.covers(Point(site[0] + x, site[1] + y)):
                count += 1
    return count * n_heights


def test_default_grid_size_near_target():
    grid = build_observation_grid(build_layout())
    assert abs(grid.size - 1730) <= 0.05 * 1730
    assert grid.size == _oracle_count(build_layout(), 0, 38.5, 3, 100.0)


def test_grid_points_inside_sector_and_height_range():
    layout = build_layout()
    for sector in (0, 1, 2, 4):
        grid = build_observation_grid(layout, sector)
        poly = Polygon(layout.sector_polygon(sector)).buffer(1e-6)
        assert all(poly.covers(Point(x, y)) for x, y, _ in grid.points)
        assert np.all((grid.points[:, 2] >= 0) & (grid.points[:, 2] <= 10))
        assert grid.height_range == (1.5, 8.5)


def test_halving_spacing_quadruples_count():
    layout = build_layout()
    for spacing in (80.0, 60.0):
        coarse = build_observation_grid(layout, 0, spacing, [5.0], 0.0).size
        fine = build_observation_grid(layout, 0, spacing / 2, [5.0], 0.0).size
        assert coarse == _oracle_count(layout, 0, spacing, 1, 0.0)
        assert fine == _oracle_count(layout, 0, spacing / 2, 1, 0.0)
        assert fine / coarse == pytest.approx(4.0, rel=0.10)


def test_degenerate_lattice():
    layout = build_layout()
    grid = build_observation_grid(layout, 0, 5000.0, [1.5], min_horizontal_distance=0.0)
    assert grid.size == 1
    with pytest.raises(EmptyGridError):
        build_observation_grid(layout, 0, 5000.0, [1.5])


@pytest.mark.parametrize("kwargs", [dict(horizontal_spacing=0.0), dict(horizontal_spacing=-5.0),
                                    dict(height_levels=[11.0]), dict(height_levels=[-1.0, 2.0]),
                                    dict(height_levels=[])])
def test_grid_rejects_bad_parameters(kwargs):
    with pytest.raises(InvalidParameterError):
        build_observation_grid(build_layout(), **kwargs)


def test_grid_ordering_deterministic():
    layout = build_layout()
    a = build_observation_grid(layout)
    b = build_observation_grid(layout)
    assert np.array_equal(a.points, b.points)
    keys = [tuple(p) for p in a.points]
    assert keys == sorted(keys)


def test_departure_axis_cases():
    d = departure_geometry([0, 0, 0], 32.0, 0.0, [500.0, 0.0, 32.0])
    assert d.azimuth == 0.0 and d.elevation == 0.0 and d.distance == 500.0
    d = departure_geometry([0, 0, 0], 32.0, 0.0, [0.0, 0.0, 0.0])
    assert d.elevation == -90.0
    d = departure_geometry([0, 0, 0], 32.0, 0.0, [100.0, 100.0, 0.0])
    assert d.azimuth == pytest.approx(45.0, abs=1e-12)
    assert d.elevation == pytest.approx(-12.75, abs=5e-3)
    assert d.elevation == pytest.approx(-math.degrees(math.atan(32 / math.hypot(100, 100))), abs=1e-12)


def test_departure_rejects_coincident_point():
    with pytest.raises(InvalidParameterError):
        departure_geometry([1.0, 2.0, 0.0], 32.0, 0.0, [1.0, 2.0, 32.0])


def test_departure_azimuth_range():
    az, el, _ = departure_angles(np.zeros(3), 0.0, np.array([[-1.0, 0.0, 0.0], [-1.0, -1e-300, 0.0]]))
    assert az[0] == 180.0
    assert np.all((az > -180) & (az <= 180))


@settings(max_examples=200, deadline=None)
@given(x=st.floats(-2000, 2000), y=st.floats(-2000, 2000), z=st.floats(0, 10),
       boresight=st.floats(-360, 360), delta=st.floats(-720, 720))
def test_departure_rotation_consistency(x, y, z, boresight, delta):
    if math.hypot(x, y) < 1e-3:
        return
    a = departure_geometry([0, 0, 0], 32.0, boresight, [x, y, z])
    b = departure_geometry([0, 0, 0], 32.0, boresight + delta, [x, y, z])
    shift = (b.azimuth - a.azimuth + delta) % 360.0
    assert min(shift, 360.0 - shift) < 1e-9
    assert b.elevation == a.elevation
    assert -180 < a.azimuth <= 180 and -90 <= a.elevation <= 90


def test_points_csv_roundtrip(tmp_path):
    grid = build_observation_grid(build_layout())
    write_points_csv(tmp_path / "g.csv", grid.points)
    assert np.array_equal(read_points_csv(tmp_path / "g.csv"), grid.points)
    header = (tmp_path / "g.csv").read_text().splitlines()[0]
    assert header == "index,x,y,z"
