"""Network-level SINR map over a hexagonal tri-sector layout."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from hybridmimo.channel import path_loss_db
from hybridmimo.errors import EmptyGridError, InvalidParameterError
from hybridmimo.geometry import CellLayout, wrap_degrees

THERMAL_NOISE_DBM_HZ = -174.0


@dataclass(frozen=True)
class SectorPattern:
    h_beamwidth: float = 65.0
    v_beamwidth: float = 10.0
    front_to_back: float = 30.0  # attenuation floor, dB
    max_gain: float = 15.0  # dBi
    downtilt: float = 6.0

    def __post_init__(self):
        if self.h_beamwidth <= 0 or self.v_beamwidth <= 0 or self.front_to_back <= 0:
            raise InvalidParameterError("beamwidths and front-to-back ratio must be positive")


def sector_gain(pattern: SectorPattern, azimuth, elevation):
    """Parabolic sector pattern in dBi.

    ``azimuth`` is measured off boresight and ``elevation`` off the
    downtilted boresight, both in degrees.
    """
    az = wrap_degrees(azimuth)
    el = np.asarray(elevation, dtype=float)
    att = 12.0 * (az / pattern.h_beamwidth) ** 2 + 12.0 * (el / pattern.v_beamwidth) ** 2
    g = pattern.max_gain - np.minimum(att, pattern.front_to_back)
    return g if np.ndim(g) else float(g)


def noise_power_dbm(bandwidth: float, noise_figure: float = 9.0) -> float:
    return THERMAL_NOISE_DBM_HZ + 10.0 * math.log10(bandwidth) + noise_figure


def watts_to_dbm(p: float) -> float:
    return 10.0 * math.log10(p * 1e3)


@dataclass(frozen=True)
class SinrMap:
    points: np.ndarray  # (P, 2)
    sinr_db: np.ndarray
    snr_db: np.ndarray
    sir_db: np.ndarray
    serving_sector: np.ndarray
    rx_power_dbm: np.ndarray  # (P, num_sectors)
    noise_power_dbm: float


def hex_map_grid(radius: float, spacing: float) -> np.ndarray:
    """Triangular lattice inside a hexagon, closed under 60-degree rotations.

    Points are ``i*a1 + j*a2`` with ``a1 = (s, 0)``, ``a2 = (s/2, s*sqrt(3)/2)``
    and ``max(|i|, |j|, |i+j|) <= radius // s``. Ordering is by ``(i, j)``.
    """
    if spacing <= 0 or radius < 0:
        raise InvalidParameterError("spacing must be positive and radius non-negative")
    n = int(radius // spacing)
    ij = [(i, j) for i in range(-n, n + 1) for j in range(-n, n + 1) if abs(i + j) <= n]
    ij = np.array(ij, dtype=float)
    x = spacing * (ij[:, 0] + 0.5 * ij[:, 1])
    y = spacing * (math.sqrt(3.0) / 2.0) * ij[:, 1]
    return np.column_stack([x, y])


def compute_sinr_map(layout: CellLayout, pattern: SectorPattern, tx_power: float = 20.0,
                     bandwidth: float = 5e6, grid=None, *, wavelength: float, exponent: float = 3.76,
                     noise_figure: float = 9.0, ue_height: float = 1.5) -> SinrMap:
    """Best-server SINR at each grid point.

    Every sector transmits ``tx_power`` watts; received power is
    ``tx_dBm + sector_gain - path_loss`` over the 3D distance. The serving
    sector is the strongest; every other sector interferes.
    """
    if tx_power <= 0 or bandwidth <= 0:
        raise InvalidParameterError("tx power and bandwidth must be positive")
    pts = np.asarray(grid, dtype=float).reshape(-1, 2) if grid is not None else np.empty((0, 2))
    if pts.shape[0] == 0:
        raise EmptyGridError("SINR grid has no points")

    n_sec = layout.num_sectors
    rx = np.empty((pts.shape[0], n_sec))
    tx_dbm = watts_to_dbm(tx_power)
    dz = ue_height - layout.tower_height
    for s in range(n_sec):
        rel = pts - layout.sector_site(s)
        horiz = np.hypot(rel[:, 0], rel[:, 1])
        az = np.degrees(np.arctan2(rel[:, 1], rel[:, 0])) - layout.sector_boresight(s)
        el = np.degrees(np.arctan2(dz, horiz)) + pattern.downtilt
        d3 = np.sqrt(horiz**2 + dz**2)
        rx[:, s] = tx_dbm + sector_gain(pattern, az, el) - path_loss_db(d3, wavelength, exponent)

    serving = np.argmax(rx, axis=1)
    lin = 10.0 ** (rx / 10.0)
    rows = np.arange(pts.shape[0])
    signal = lin[rows, serving]
    # summing the others directly avoids cancellation in sum - signal
    others = np.where(np.arange(n_sec)[None, :] == serving[:, None], 0.0, lin)
    interference = others.sum(axis=1)
    n_dbm = noise_power_dbm(bandwidth, noise_figure)
    noise = 10.0 ** (n_dbm / 10.0)

    snr = 10.0 * np.log10(signal / noise)
    sinr = 10.0 * np.log10(signal / (interference + noise))
    with np.errstate(divide="ignore"):
        sir = 10.0 * np.log10(signal / interference)
    return SinrMap(pts, sinr, snr, sir, serving, rx, n_dbm)


def write_sinr_csv(path, smap: SinrMap) -> None:
    with open(Path(path), "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["x", "y", "serving_sector", "sinr_dB"])
        for (x, y), s, v in zip(smap.points, smap.serving_sector, smap.sinr_db):
            out.writerow([repr(float(x)), repr(float(y)), int(s), repr(float(v))])
