"""Far-field beam patterns and per-element power maps of array weights."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from hybridmimo.errors import InvalidParameterError, ShapeError
from hybridmimo.geometry import ArrayGeometry

EXPORT_FLOOR_DB = -60.0
DEFAULT_AZIMUTHS = np.arange(-90.0, 90.0 + 0.5, 1.0)
DEFAULT_ELEVATIONS = np.arange(-90.0, 30.0 + 0.5, 1.0)


def steering_vector(array: ArrayGeometry, azimuth, elevation) -> np.ndarray:
    """Per-element response toward (azimuth, elevation) in degrees, array frame.

    Uses the same sign as the channel's ``exp(-j 2 pi d / lambda)`` phase, so
    ``a^H w`` is the far-field field radiated by weights ``w``. Angles
    broadcast; the element axis is appended last.
    """
    az = np.radians(np.asarray(azimuth, dtype=float))[..., None]
    el = np.radians(np.asarray(elevation, dtype=float))[..., None]
    p = array.element_positions
    proj = (np.cos(el) * np.cos(az)) * p[:, 0] + (np.cos(el) * np.sin(az)) * p[:, 1] + np.sin(el) * p[:, 2]
    return np.exp(1j * ((-2.0 * np.pi / array.wavelength) * proj))


def array_response(a: np.ndarray, w: np.ndarray) -> np.ndarray:
    """``a^H w`` along the last axis."""
    return (np.conj(a) * w).sum(axis=-1)


def response_power(r):
    # explicit products: scalar ``x ** 2`` goes through pow() and can differ in the last bit
    return r.real * r.real + r.imag * r.imag


@dataclass(frozen=True)
class BeamPattern:
    azimuth: np.ndarray
    elevation: np.ndarray
    power: np.ndarray  # linear, (n_az, n_el), relative to a single element
    weight_norm: float

    @property
    def gain_db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 10.0 * np.log10(self.power)

    def peak(self) -> tuple[float, float]:
        i, j = np.unravel_index(np.argmax(self.power), self.power.shape)
        return float(self.azimuth[i]), float(self.elevation[j])


def _check_grid(g, name):
    g = np.asarray(g, dtype=float)
    if g.ndim != 1 or g.size == 0:
        raise InvalidParameterError(f"{name} grid must be a nonempty 1D sequence")
    if g.size > 1 and np.any(np.diff(g) <= 0):
        raise InvalidParameterError(f"{name} grid must be strictly increasing")
    return g


def beam_pattern(array: ArrayGeometry, w, azimuths=DEFAULT_AZIMUTHS, elevations=DEFAULT_ELEVATIONS) -> BeamPattern:
    """``|a(az, el)^H w|^2 / ||w||^2`` over an azimuth x elevation grid."""
    w = np.asarray(w, dtype=complex)
    if w.shape != (array.num_elements,):
        raise ShapeError(f"weights have shape {w.shape}, array has {array.num_elements} elements")
    norm2 = float(np.sum(response_power(w)))
    if not norm2 > 0:
        raise InvalidParameterError("weight vector is zero")
    az = _check_grid(azimuths, "azimuth")
    el = _check_grid(elevations, "elevation")
    AZ, EL = np.meshgrid(az, el, indexing="ij")
    r = array_response(steering_vector(array, AZ, EL), w)
    return BeamPattern(az, el, response_power(r) / norm2, float(np.sqrt(norm2)))


@dataclass(frozen=True)
class ElementPowerMap:
    power: np.ndarray  # (rows, columns), peak 1; row 0 is the top of the array
    raw: np.ndarray  # same layout, |w_n|^2


def element_power(array: ArrayGeometry, w) -> ElementPowerMap:
    w = np.asarray(w, dtype=complex)
    if w.shape != (array.num_elements,):
        raise ShapeError(f"weights have shape {w.shape}, array has {array.num_elements} elements")
    p = response_power(w)
    # elements are stored column by column, bottom to top
    grid = p.reshape(array.columns, array.rows_per_column).T[::-1]
    peak = grid.max()
    norm = grid / peak if peak > 0 else np.zeros_like(grid)
    return ElementPowerMap(norm, grid.copy())


def write_pattern_csv(path, pattern: BeamPattern, floor_db: float = EXPORT_FLOOR_DB) -> None:
    g = np.maximum(pattern.gain_db, floor_db)
    with open(Path(path), "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["azimuth", "elevation", "gain_dB"])
        for i, a in enumerate(pattern.azimuth):
            for j, e in enumerate(pattern.elevation):
                out.writerow([repr(float(a)), repr(float(e)), f"{g[i, j]:.12g}"])


def write_element_power_csv(path, array: ArrayGeometry, emap: ElementPowerMap) -> None:
    """Row-major over the array layout, top row first."""
    rows = array.rows_per_column
    with open(Path(path), "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["row", "column", "element", "power", "power_norm"])
        for i in range(rows):
            for c in range(array.columns):
                n = array.element_index(rows - 1 - i, c)
                out.writerow([i, c, n, repr(float(emap.raw[i, c])), repr(float(emap.power[i, c]))])
