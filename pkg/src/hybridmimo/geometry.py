"""Array layout, hexagonal cell layout and the 3D observation grid.

Coordinate frame: the site of sector 0 is at the origin, the array reference
(phase center) sits at ``(0, 0, tower_height)`` and sector 0 points along +x.
The array itself lies in its local y-z plane and faces local +x.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from hybridmimo.errors import EmptyGridError, InvalidParameterError

SPEED_OF_LIGHT = 299_792_458.0

VERTICAL_PITCH_WAVELENGTHS = 0.7
HORIZONTAL_PITCH_WAVELENGTHS = 0.5

DEFAULT_GRID_SPACING = 38.5
DEFAULT_GRID_HEIGHTS = (1.5, 5.0, 8.5)
DEFAULT_MIN_HORIZONTAL_DISTANCE = 100.0
MAX_GRID_HEIGHT = 10.0


@dataclass(frozen=True)
class ArrayGeometry:
    """Planar antenna array in its local frame (faces +x).

    ``element_positions`` is ``(N, 3)`` in meters. Elements are ordered column
    by column, bottom to top within a column, so element ``n`` sits at column
    ``n // rows_per_column`` and row ``n % rows_per_column``.
    """

    element_positions: np.ndarray
    carrier_frequency: float
    columns: int
    rows_per_column: int

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency

    @property
    def num_elements(self) -> int:
        return self.element_positions.shape[0]

    def element_index(self, row: int, column: int) -> int:
        return column * self.rows_per_column + row


def build_array(columns: int = 4, rows: int = 12, carrier_frequency: float = 2e9,
                stagger: bool = True) -> ArrayGeometry:
    """Staggered rectangular array with lambda/2 columns and 0.7 lambda rows.

    Odd columns are shifted up by half the vertical pitch. The element
    centroid is placed at the origin.
    """
    if columns < 1 or rows < 1:
        raise InvalidParameterError(f"array dimensions must be >= 1, got {columns}x{rows}")
    if not carrier_frequency > 0:
        raise InvalidParameterError(f"carrier frequency must be positive, got {carrier_frequency}")

    lam = SPEED_OF_LIGHT / carrier_frequency
    dy = HORIZONTAL_PITCH_WAVELENGTHS * lam
    dz = VERTICAL_PITCH_WAVELENGTHS * lam
    col, row = np.divmod(np.arange(columns * rows), rows)
    pos = np.zeros((columns * rows, 3))
    pos[:, 1] = col * dy
    pos[:, 2] = row * dz + np.where(stagger & (col % 2 == 1), dz / 2, 0.0)
    pos -= pos.mean(axis=0)
    # centroid subtraction leaves ~1e-17 residue; snap the trivial axes
    pos[:, 0] = 0.0
    if columns == 1:
        pos[:, 1] = 0.0
    pos.flags.writeable = False
    return ArrayGeometry(pos, float(carrier_frequency), columns, rows)


@dataclass(frozen=True)
class CellLayout:
    site_positions: np.ndarray  # (n_sites, 2)
    inter_site_distance: float
    boresight_azimuths: tuple[float, ...]  # degrees, shared by every site
    tower_height: float
    downtilt: float

    @property
    def sectors_per_site(self) -> int:
        return len(self.boresight_azimuths)

    @property
    def num_sectors(self) -> int:
        return self.site_positions.shape[0] * self.sectors_per_site

    @property
    def cell_radius(self) -> float:
        """Circumradius of the hexagonal site cell."""
        return self.inter_site_distance / math.sqrt(3.0)

    def sector_site(self, sector_id: int) -> np.ndarray:
        return self.site_positions[sector_id // self.sectors_per_site]

    def sector_boresight(self, sector_id: int) -> float:
        return self.boresight_azimuths[sector_id % self.sectors_per_site]

    def sector_polygon(self, sector_id: int) -> np.ndarray:
        """Vertices (counter-clockwise) of the sector's slice of its site hexagon.

        The site hexagon has vertices at 0, 60, ..., 300 degrees, so with three
        sectors boresighted at 0/120/240 degrees each slice is a rhombus.
        """
        if not 0 <= sector_id < self.num_sectors:
            raise InvalidParameterError(f"sector_id {sector_id} out of range")
        site = self.sector_site(sector_id)
        r = self.cell_radius
        if self.sectors_per_site == 1:
            ang = np.deg2rad(np.arange(0, 360, 60))
            return site + r * np.column_stack([np.cos(ang), np.sin(ang)])

        half = 180.0 / self.sectors_per_site
        b = self.sector_boresight(sector_id)
        start, stop = b - half, b + half
        angles = [start]
        first_vertex = math.ceil(start / 60.0 + 1e-12) * 60.0
        angles += list(np.arange(first_vertex, stop - 1e-9, 60.0))
        angles.append(stop)
        verts = [site]
        for a in angles:
            rho = _hexagon_radius(r, a)
            verts.append(site + rho * np.array([math.cos(math.radians(a)), math.sin(math.radians(a))]))
        return np.array(verts)


def _hexagon_radius(circumradius: float, angle_deg: float) -> float:
    # distance from center to the boundary of a hexagon with vertices at multiples of 60 deg
    phi = math.radians((angle_deg % 60.0) - 30.0)
    return circumradius * math.cos(math.radians(30.0)) / math.cos(phi)


def hex_site_positions(inter_site_distance: float, sites: int = 19) -> np.ndarray:
    """Center site plus rings of a hexagonal lattice (1, 7 or 19 sites)."""
    if sites not in (1, 7, 19):
        raise InvalidParameterError(f"sites must be 1, 7 or 19, got {sites}")
    d = inter_site_distance
    # lattice basis for neighbors at 30 + 60k degrees
    a1 = d * np.array([math.cos(math.radians(30)), math.sin(math.radians(30))])
    a2 = d * np.array([math.cos(math.radians(90)), math.sin(math.radians(90))])
    rings = {1: 0, 7: 1, 19: 2}[sites]
    out = []
    for i in range(-rings, rings + 1):
        for j in range(-rings, rings + 1):
            if max(abs(i), abs(j), abs(i + j)) <= rings:
                out.append(i * a1 + j * a2)
    out.sort(key=lambda p: (round(math.hypot(*p), 6), round(math.atan2(p[1], p[0]) % (2 * math.pi), 9)))
    pos = np.array(out)
    pos[np.abs(pos) < 1e-9 * d] = 0.0
    return pos


def build_layout(inter_site_distance: float = 1732.0, sites: int = 19, sectors_per_site: int = 3,
                 tower_height: float = 32.0, downtilt: float = 6.0) -> CellLayout:
    if inter_site_distance <= 0 or tower_height <= 0:
        raise InvalidParameterError("inter-site distance and tower height must be positive")
    if sectors_per_site < 1:
        raise InvalidParameterError("sectors_per_site must be >= 1")
    boresights = tuple(360.0 * s / sectors_per_site for s in range(sectors_per_site))
    return CellLayout(hex_site_positions(inter_site_distance, sites), float(inter_site_distance),
                      boresights, float(tower_height), float(downtilt))


@dataclass(frozen=True)
class ObservationGrid:
    points: np.ndarray  # (L, 3), global frame
    height_range: tuple[float, float]
    sector_id: int
    site_position: np.ndarray  # (2,)
    boresight: float  # degrees

    @property
    def size(self) -> int:
        return self.points.shape[0]


def points_in_convex_polygon(xy: np.ndarray, polygon: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Boundary-inclusive test against a counter-clockwise convex polygon."""
    xy = np.atleast_2d(xy)
    inside = np.ones(xy.shape[0], dtype=bool)
    scale = max(1.0, float(np.abs(polygon).max()))
    for p, q in zip(polygon, np.roll(polygon, -1, axis=0)):
        edge = q - p
        cross = edge[0] * (xy[:, 1] - p[1]) - edge[1] * (xy[:, 0] - p[0])
        inside &= cross >= -tol * scale * np.hypot(*edge)
    return inside


def build_observation_grid(layout: CellLayout, sector_id: int = 0,
                           horizontal_spacing: float = DEFAULT_GRID_SPACING,
                           height_levels=DEFAULT_GRID_HEIGHTS,
                           min_horizontal_distance: float = DEFAULT_MIN_HORIZONTAL_DISTANCE,
                           ) -> ObservationGrid:
    """Regular lattice clipped to one hexagonal sector, stacked over heights.

    The lattice is anchored at the sector's site: horizontal positions are
    integer multiples of ``horizontal_spacing`` relative to the site. Points
    closer than ``min_horizontal_distance`` to the mast are dropped. Ordering
    is by x, then y, then height.
    """
    if not horizontal_spacing > 0:
        raise InvalidParameterError(f"spacing must be positive, got {horizontal_spacing}")
    heights = np.sort(np.asarray(height_levels, dtype=float))
    if heights.size == 0 or heights[0] < 0 or heights[-1] > MAX_GRID_HEIGHT:
        raise InvalidParameterError(f"heights must lie in [0, {MAX_GRID_HEIGHT}] m, got {height_levels}")
    if min_horizontal_distance < 0:
        raise InvalidParameterError("min_horizontal_distance must be >= 0")

    polygon = layout.sector_polygon(sector_id)
    site = layout.sector_site(sector_id)
    lo = np.floor((polygon.min(axis=0) - site) / horizontal_spacing).astype(int)
    hi = np.ceil((polygon.max(axis=0) - site) / horizontal_spacing).astype(int)
    ix = np.arange(lo[0], hi[0] + 1) * horizontal_spacing
    iy = np.arange(lo[1], hi[1] + 1) * horizontal_spacing
    gx, gy = np.meshgrid(ix, iy, indexing="ij")
    rel = np.column_stack([gx.ravel(), gy.ravel()])
    keep = points_in_convex_polygon(rel + site, polygon)
    keep &= np.hypot(rel[:, 0], rel[:, 1]) >= min_horizontal_distance
    xy = rel[keep] + site
    if xy.shape[0] == 0:
        raise EmptyGridError(f"no lattice point of spacing {horizontal_spacing} m falls in sector {sector_id}")

    pts = np.column_stack([np.repeat(xy, heights.size, axis=0), np.tile(heights, xy.shape[0])])
    pts.flags.writeable = False
    return ObservationGrid(pts, (float(heights[0]), float(heights[-1])), sector_id,
                           site.copy(), layout.sector_boresight(sector_id))


@dataclass(frozen=True)
class DepartureAngles:
    azimuth: float  # degrees from boresight, (-180, 180]
    elevation: float  # degrees from horizontal, negative below
    distance: float


def wrap_degrees(angle):
    """Wrap to (-180, 180]."""
    a = np.mod(np.asarray(angle, dtype=float) + 180.0, 360.0) - 180.0
    a = np.where(a == -180.0, 180.0, a)
    return a if a.ndim else float(a)


def departure_angles(reference: np.ndarray, boresight: float, points: np.ndarray):
    """Vectorized azimuth/elevation/distance from a 3D reference to many points."""
    delta = np.atleast_2d(points) - np.asarray(reference, dtype=float)
    horiz = np.hypot(delta[:, 0], delta[:, 1])
    dist = np.sqrt(horiz**2 + delta[:, 2] ** 2)
    az = wrap_degrees(np.degrees(np.arctan2(delta[:, 1], delta[:, 0])) - boresight)
    el = np.degrees(np.arctan2(delta[:, 2], horiz))
    return np.atleast_1d(az), el, dist


def departure_geometry(array_origin, tower_height: float, boresight: float, point) -> DepartureAngles:
    """Angles of departure from an array mounted ``tower_height`` above ``array_origin``."""
    ref = np.asarray(array_origin, dtype=float) + np.array([0.0, 0.0, tower_height])
    p = np.asarray(point, dtype=float)
    if np.allclose(p, ref, rtol=0, atol=1e-12):
        raise InvalidParameterError("observation point coincides with the array reference")
    az, el, dist = departure_angles(ref, boresight, p[None, :])
    return DepartureAngles(float(az[0]), float(el[0]), float(dist[0]))


def write_points_csv(path, points: np.ndarray) -> None:
    """One row per element or observation point: index, x, y, z."""
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "x", "y", "z"])
        for i, (x, y, z) in enumerate(np.asarray(points)):
            w.writerow([i, repr(float(x)), repr(float(y)), repr(float(z))])


def read_points_csv(path) -> np.ndarray:
    with open(Path(path), newline="") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([[float(r["x"]), float(r["y"]), float(r["z"])] for r in rows]).reshape(-1, 3)
