"""Digital and coherent-hybrid downlink per subband, and their comparison.

Digital:  ``y_D[k] = H[k] D[k] x[k] + z[k]``
Hybrid:   ``y_H[k] = H[k] W F[k] x[k] + z[k]``

With ``H[k]`` built on the rank-``t`` long-term channel, ``W`` the first
``t`` eigenbeams and ``F[k] = W^H D[k]``, the two outputs coincide.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from hybridmimo import rng as rngmod
from hybridmimo.channel import CompositeChannel
from hybridmimo.eigenbeams import EigenbeamSet, effective_precoder
from hybridmimo.errors import InvalidParameterError, ShapeError

RESIDUAL_BOUND = 1e-10
_EPS = 1e-300


@dataclass(frozen=True)
class PrecoderSet:
    matrices: np.ndarray  # (K, N or M, S)
    role: str  # "digital" or "baseband"

    def __post_init__(self):
        if self.role not in ("digital", "baseband"):
            raise InvalidParameterError(f"unknown precoder role {self.role!r}")
        if self.matrices.ndim != 3:
            raise ShapeError(f"precoders must be (K, rows, S), got {self.matrices.shape}")

    @property
    def num_subbands(self) -> int:
        return self.matrices.shape[0]

    @property
    def num_streams(self) -> int:
        return self.matrices.shape[2]


@dataclass(frozen=True)
class SourceSymbols:
    symbols: np.ndarray  # (K, S)
    seed: int | None = None


@dataclass(frozen=True)
class ReceivedField:
    samples: np.ndarray  # (K, L)
    noise_power: float = 0.0

    @property
    def num_subbands(self) -> int:
        return self.samples.shape[0]


@dataclass(frozen=True)
class SubframeSchedule:
    subframes: tuple[tuple[int, ...], ...]

    @property
    def cycle_length(self) -> int:
        return len(self.subframes)

    def active_beams(self, subframe: int) -> tuple[int, ...]:
        """Beams held by the analog network during ``subframe`` (cycles forever)."""
        return self.subframes[subframe % self.cycle_length]

    def pairs(self):
        return [(i, b) for i, beams in enumerate(self.subframes) for b in beams]


def random_precoders(K: int, N: int, S: int, seed: int = 0) -> PrecoderSet:
    gen = rngmod.stream(seed, rngmod.PRECODERS)
    return PrecoderSet(rngmod.complex_normal(gen, (K, N, S)), "digital")


def random_symbols(K: int, S: int, seed: int = 0) -> SourceSymbols:
    """Unit-power circular Gaussian symbols."""
    gen = rngmod.stream(seed, rngmod.SYMBOLS)
    return SourceSymbols(rngmod.complex_normal(gen, (K, S)), seed)


def draw_noise(K: int, L: int, noise_power: float, seed: int = 0) -> ReceivedField:
    if noise_power < 0:
        raise InvalidParameterError("noise power must be >= 0")
    if noise_power == 0:
        return ReceivedField(np.zeros((K, L), dtype=complex), 0.0)
    gen = rngmod.stream(seed, rngmod.NOISE)
    return ReceivedField(rngmod.complex_normal(gen, (K, L), noise_power), float(noise_power))


def hybrid_baseband(beams: EigenbeamSet, D: PrecoderSet) -> PrecoderSet:
    """Baseband precoders that make the hybrid array mimic ``D``."""
    return PrecoderSet(effective_precoder(beams, D.matrices), "baseband")


def _noise_samples(z, K: int, L: int):
    if z is None:
        return None, 0.0
    samples = np.asarray(getattr(z, "samples", z))
    if samples.shape != (K, L):
        raise ShapeError(f"noise is {samples.shape}, expected {(K, L)}")
    return samples, float(getattr(z, "noise_power", 0.0))


def _check_symbols(x: SourceSymbols, K: int, S: int) -> np.ndarray:
    sym = np.asarray(x.symbols)
    if sym.shape != (K, S):
        raise ShapeError(f"symbols are {sym.shape}, expected {(K, S)}")
    return sym


def digital_downlink(channel: CompositeChannel, D: PrecoderSet, x: SourceSymbols, z=None) -> ReceivedField:
    K, L, N = channel.matrices.shape
    if D.num_subbands != K or D.matrices.shape[1] != N:
        raise ShapeError(f"digital precoders are {D.matrices.shape}, channel needs (K={K}, N={N}, S)")
    sym = _check_symbols(x, K, D.num_streams)
    noise, p = _noise_samples(z, K, L)

    y = np.empty((K, L), dtype=complex)
    for k in range(K):
        y[k] = channel.matrices[k] @ (D.matrices[k] @ sym[k])
    if noise is not None:
        y += noise
    return ReceivedField(y, p)


def hybrid_downlink(channel: CompositeChannel, W, F: PrecoderSet, x: SourceSymbols, z=None) -> ReceivedField:
    """``W`` is an :class:`EigenbeamSet` or any ``(N, M)`` analog weight matrix."""
    K, L, N = channel.matrices.shape
    w = np.asarray(getattr(W, "W", W))
    if w.ndim != 2 or w.shape[0] != N:
        raise ShapeError(f"analog weights are {w.shape}, channel has N={N}")
    M = w.shape[1]
    if F.num_subbands != K or F.matrices.shape[1:] != (M, M):
        raise ShapeError(f"baseband precoders are {F.matrices.shape}, need (K={K}, M={M}, S={M})")
    sym = _check_symbols(x, K, M)
    noise, p = _noise_samples(z, K, L)

    y = np.empty((K, L), dtype=complex)
    for k in range(K):
        y[k] = channel.matrices[k] @ (w @ (F.matrices[k] @ sym[k]))
    if noise is not None:
        y += noise
    return ReceivedField(y, p)


def equivalence_residual(y_D: ReceivedField, y_H: ReceivedField) -> np.ndarray:
    """Per-subband ``||y_H - y_D|| / max(||y_D||, eps)``."""
    a, b = np.asarray(y_D.samples), np.asarray(y_H.samples)
    if a.shape != b.shape:
        raise ShapeError(f"received fields differ in shape: {a.shape} vs {b.shape}")
    num = np.linalg.norm(b - a, axis=1)
    den = np.maximum(np.linalg.norm(a, axis=1), _EPS)
    return num / den


def subframe_multiplex(t: int, M: int) -> SubframeSchedule:
    """Round-robin the ``t`` eigenbeams over subframes of ``M`` RF chains each.

    Beams are taken strongest first; the cycle is ``ceil(t / M)`` subframes long.
    """
    if t < 1 or M < 1:
        raise InvalidParameterError(f"need t >= 1 and M >= 1, got t={t}, M={M}")
    n = math.ceil(t / M)
    return SubframeSchedule(tuple(tuple(range(i * M, min((i + 1) * M, t))) for i in range(n)))


def write_residuals_csv(path, rows) -> None:
    """``rows``: iterable of (rank, k, residual); k is 1-based."""
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "k", "residual"])
        for t, k, r in rows:
            w.writerow([t, k, repr(float(r))])


def write_schedule_csv(path, schedule: SubframeSchedule) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["subframe", "beam"])
        w.writerows(schedule.pairs())
