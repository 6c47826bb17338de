"""Long-term line-of-sight channel, per-subband local scattering, and their product."""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse

from hybridmimo import rng as rngmod
from hybridmimo.errors import InvalidParameterError, ShapeError
from hybridmimo.geometry import ArrayGeometry, ObservationGrid

SCATTER_MODELS = ("diagonal", "banded", "identity")
DEFAULT_SUBBANDS = 25
DEFAULT_BAND_HALF_WIDTH = 2


def path_gain(distance, wavelength: float, exponent: float = 2.0):
    """Amplitude gain with a 1 m free-space reference and power-law decay beyond it.

    ``(wavelength / 4pi) * distance ** (-exponent / 2)``; with exponent 2 this
    is the Friis free-space amplitude.
    """
    d = np.asarray(distance, dtype=float)
    if np.any(~(d > 0)):
        raise InvalidParameterError("distance must be positive")
    g = (wavelength / (4.0 * math.pi)) * d ** (-exponent / 2.0)
    return g if g.ndim else float(g)


def path_loss_db(distance, wavelength: float, exponent: float = 2.0):
    return -20.0 * np.log10(path_gain(distance, wavelength, exponent))


def rotate_z(points: np.ndarray, angle_deg: float) -> np.ndarray:
    c, s = math.cos(math.radians(angle_deg)), math.sin(math.radians(angle_deg))
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return points @ rot.T


def element_positions_global(array: ArrayGeometry, site_xy, tower_height: float,
                             boresight: float) -> np.ndarray:
    ref = np.array([site_xy[0], site_xy[1], tower_height], dtype=float)
    return rotate_z(array.element_positions, boresight) + ref


@dataclass(frozen=True)
class LongTermChannel:
    matrix: np.ndarray  # (L, N) complex
    wavelength: float
    path_loss_exponent: float

    @property
    def shape(self):
        return self.matrix.shape


def build_long_term_channel(array: ArrayGeometry, grid: ObservationGrid, tower_height: float = 32.0,
                            exponent: float = 2.0) -> LongTermChannel:
    """LoS channel from every array element to every observation point.

    Entry ``(l, n)`` has the path-loss amplitude of point ``l`` seen from the
    array reference and the exact spherical-wave phase of element ``n``.
    """
    lam = array.wavelength
    ref = np.array([grid.site_position[0], grid.site_position[1], tower_height], dtype=float)
    elements = element_positions_global(array, grid.site_position, tower_height, grid.boresight)
    pts = np.asarray(grid.points, dtype=float)

    d_ln = np.sqrt(((pts[:, None, :] - elements[None, :, :]) ** 2).sum(axis=-1))
    if np.any(d_ln <= 0):
        raise InvalidParameterError("an observation point coincides with an array element")
    d_l = np.linalg.norm(pts - ref, axis=1)
    if np.any(d_l <= 0):
        raise InvalidParameterError("an observation point coincides with the array reference")

    phase = np.mod(d_ln, lam) * (-2.0 * math.pi / lam)
    h = path_gain(d_l, lam, exponent)[:, None] * np.exp(1j * phase)
    h.flags.writeable = False
    return LongTermChannel(h, lam, float(exponent))


@dataclass(frozen=True)
class SubbandScatterChannel:
    subband_index: int  # 1-based
    matrix: sparse.csr_array  # (L, L)
    model_tag: str


def sample_local_scatter(L: int, K: int = DEFAULT_SUBBANDS, model_tag: str = "diagonal", seed: int = 0,
                         band_half_width: int = DEFAULT_BAND_HALF_WIDTH) -> list[SubbandScatterChannel]:
    """Draw ``K`` local-scatter matrices.

    ``diagonal``: independent unit-power Rayleigh gain per location.
    ``banded``: each location mixes its ``band_half_width`` neighbors on either
    side with i.i.d. CN(0, 1/(2b+1)) coefficients, so rows keep unit power.
    ``identity``: no scattering.
    """
    if L < 1 or K < 1:
        raise InvalidParameterError(f"L and K must be >= 1, got L={L}, K={K}")
    if model_tag not in SCATTER_MODELS:
        raise InvalidParameterError(f"unknown scatter model {model_tag!r}; expected one of {SCATTER_MODELS}")

    gen = rngmod.stream(seed, rngmod.SCATTER)
    out = []
    if model_tag == "identity":
        eye = sparse.identity(L, dtype=complex, format="csr")
        return [SubbandScatterChannel(k + 1, sparse.csr_array(eye), model_tag) for k in range(K)]
    if model_tag == "diagonal":
        gains = rngmod.complex_normal(gen, (K, L))
        for k in range(K):
            out.append(SubbandScatterChannel(k + 1, sparse.csr_array(sparse.diags_array(gains[k], format="csr")),
                                             model_tag))
        return out

    b = int(band_half_width)
    if b < 0:
        raise InvalidParameterError("band_half_width must be >= 0")
    offsets = [o for o in range(-b, b + 1) if abs(o) < L]
    power = 1.0 / (2 * b + 1)
    for k in range(K):
        diags = [rngmod.complex_normal(gen, L - abs(o), power) for o in offsets]
        m = sparse.diags_array(diags, offsets=offsets, shape=(L, L), format="csr")
        out.append(SubbandScatterChannel(k + 1, sparse.csr_array(m), model_tag))
    return out


@dataclass(frozen=True)
class CompositeChannel:
    matrices: np.ndarray  # (K, L, N)
    scatter: tuple
    longterm: np.ndarray  # the (L, N) factor the products were built on

    @property
    def num_subbands(self) -> int:
        return self.matrices.shape[0]

    def __getitem__(self, k: int) -> np.ndarray:
        return self.matrices[k]


def _as_matrix(channel) -> np.ndarray:
    return np.asarray(getattr(channel, "matrix", channel))


def compose_channel(scatter, longterm) -> CompositeChannel:
    """``H[k] = H_L[k] @ H_R`` for every subband.

    ``longterm`` may be a :class:`LongTermChannel`, a truncated channel, or a
    plain array.
    """
    hr = _as_matrix(longterm)
    if len(scatter) < 1:
        raise ShapeError("need at least one subband")
    L = hr.shape[0]
    out = np.empty((len(scatter), L, hr.shape[1]), dtype=complex)
    for i, s in enumerate(scatter):
        if s.matrix.shape != (L, L):
            raise ShapeError(f"subband {s.subband_index}: scatter is {s.matrix.shape}, channel has L={L}")
        out[i] = hr if s.model_tag == "identity" else s.matrix @ hr
    out.flags.writeable = False
    return CompositeChannel(out, tuple(scatter), hr)


# --- matrix interchange -----------------------------------------------------
# binary: three little-endian uint64 (rows, cols, K), then K*rows*cols
# complex128 values, row-major, real/imag interleaved.

_HEADER = struct.Struct("<QQQ")


def write_matrices_binary(path, matrices) -> None:
    m = np.asarray(matrices, dtype="<c16")
    if m.ndim == 2:
        m = m[None]
    k, rows, cols = m.shape
    with open(Path(path), "wb") as fh:
        fh.write(_HEADER.pack(rows, cols, k))
        fh.write(np.ascontiguousarray(m).tobytes())


def read_matrices_binary(path) -> np.ndarray:
    data = Path(path).read_bytes()
    rows, cols, k = _HEADER.unpack_from(data)
    body = np.frombuffer(data, dtype="<c16", offset=_HEADER.size)
    if body.size != rows * cols * k:
        raise ShapeError(f"expected {rows * cols * k} values, found {body.size}")
    return body.reshape(k, rows, cols).astype(complex)


def write_matrices_csv(path, matrices) -> None:
    m = np.asarray(matrices, dtype=complex)
    if m.ndim == 2:
        m = m[None]
    k, rows, cols = m.shape
    with open(Path(path), "w") as fh:
        fh.write(f"{rows},{cols},{k}\n")
        for row in m.reshape(k * rows, cols):
            vals = np.column_stack([row.real, row.imag]).ravel()
            fh.write(",".join(repr(float(v)) for v in vals) + "\n")


def read_matrices_csv(path) -> np.ndarray:
    with open(Path(path)) as fh:
        rows, cols, k = (int(v) for v in fh.readline().split(","))
        flat = np.array([[float(v) for v in line.split(",")] for line in fh if line.strip()])
    if flat.shape != (k * rows, 2 * cols):
        raise ShapeError(f"expected {k * rows}x{2 * cols} values, found {flat.shape}")
    return (flat[:, 0::2] + 1j * flat[:, 1::2]).reshape(k, rows, cols)
