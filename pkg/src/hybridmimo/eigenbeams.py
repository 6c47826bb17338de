"""SVD of the long-term channel, rank profile, truncation and eigenbeams.

The eigenbeams are the leading right singular vectors of the long-term
channel. They do not depend on the subband, so a hybrid array can hold them
in its analog network while the per-subband digital stage combines them.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from hybridmimo.errors import InvalidParameterError, NumericError, ShapeError

RANK_TOL = 1e-10
_TIE_TOL = 1e-12


@dataclass(frozen=True)
class ChannelSvd:
    U: np.ndarray  # (L, r)
    singular_values: np.ndarray  # (r,), descending
    V: np.ndarray  # (N, r)
    source_dims: tuple[int, int]

    @property
    def rank_limit(self) -> int:
        return self.singular_values.size

    def numerical_rank(self, tol: float = RANK_TOL) -> int:
        s = self.singular_values
        return int(np.count_nonzero(s > tol * s[0])) if s.size and s[0] > 0 else 0

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.singular_values) @ self.V.conj().T


def normalize_phase(vectors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rotate each column so its largest-magnitude entry is real and positive.

    Returns the rotated columns and the unit phasors that were removed
    (``vectors == rotated * phasors``).
    """
    v = np.array(vectors, dtype=complex, copy=True)
    if v.size == 0:
        return v, np.ones(v.shape[-1], dtype=complex)
    idx = np.argmax(np.abs(v), axis=0)
    cols = np.arange(v.shape[1])
    pivot = v[idx, cols]
    mag = np.abs(pivot)
    phasor = np.where(mag > 0, pivot / np.where(mag > 0, mag, 1.0), 1.0)
    v *= phasor.conj()
    v[idx, cols] = mag
    return v, phasor


def _lex_key(col: np.ndarray):
    return tuple(np.column_stack([col.real, col.imag]).ravel())


def svd_decompose(channel) -> ChannelSvd:
    """Thin SVD with descending singular values and phase-normalized vectors.

    ``r = min(L, N)`` triplets are kept, including any (near-)zero singular
    values. Among singular values equal to within 1e-12 of the largest, the
    columns are ordered by descending lexicographic value of the normalized
    right vector.
    """
    h = np.asarray(getattr(channel, "matrix", channel))
    if h.ndim != 2 or h.size == 0:
        raise ShapeError(f"expected a nonempty 2D matrix, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise NumericError("channel matrix has non-finite entries")

    u, s, vh = np.linalg.svd(h.astype(complex), full_matrices=False)
    v, phasor = normalize_phase(vh.conj().T)
    u = u * phasor.conj()

    order = list(range(s.size))
    if s.size > 1 and s[0] > 0:
        i = 0
        while i < s.size:
            j = i + 1
            while j < s.size and s[j - 1] - s[j] <= _TIE_TOL * s[0]:
                j += 1
            if j - i > 1:
                order[i:j] = sorted(order[i:j], key=lambda c: _lex_key(v[:, c]), reverse=True)
            i = j
    order = np.array(order)
    return ChannelSvd(u[:, order], s[order], v[:, order], tuple(h.shape))


@dataclass(frozen=True)
class RankProfile:
    cumulative_power: np.ndarray

    def at(self, rank: int) -> float:
        """Fraction of channel power held by the ``rank`` largest singular values."""
        if not 1 <= rank <= self.cumulative_power.size:
            raise InvalidParameterError(f"rank {rank} outside 1..{self.cumulative_power.size}")
        return float(self.cumulative_power[rank - 1])


def cumulative_power(svd: ChannelSvd) -> RankProfile:
    p = np.cumsum(svd.singular_values**2)
    if not p[-1] > 0:
        raise NumericError("channel has zero power")
    return RankProfile(p / p[-1])


@dataclass(frozen=True)
class TruncatedChannel:
    matrix: np.ndarray  # (L, N), rank t
    rank_budget: int
    U_t: np.ndarray
    sigma_t: np.ndarray
    V_t: np.ndarray


def _check_rank(svd: ChannelSvd, t: int) -> int:
    if not (isinstance(t, (int, np.integer)) and 1 <= t <= svd.rank_limit):
        raise InvalidParameterError(f"rank budget must be an integer in 1..{svd.rank_limit}, got {t!r}")
    return int(t)


def truncate(svd: ChannelSvd, t: int) -> TruncatedChannel:
    """Best rank-``t`` approximation ``U_t diag(sigma_t) V_t^H``."""
    t = _check_rank(svd, t)
    ut, st, vt = svd.U[:, :t], svd.singular_values[:t], svd.V[:, :t]
    return TruncatedChannel((ut * st) @ vt.conj().T, t, ut.copy(), st.copy(), vt.copy())


def truncation_residual(svd: ChannelSvd, t: int) -> float:
    """Frobenius error of the rank-``t`` truncation, from the discarded singular values."""
    t = _check_rank(svd, t)
    return float(np.sqrt(np.sum(svd.singular_values[t:] ** 2)))


@dataclass(frozen=True)
class EigenbeamSet:
    W: np.ndarray  # (N, t), columns are beams
    sigma_t: np.ndarray
    rank_budget: int

    @property
    def num_elements(self) -> int:
        return self.W.shape[0]


def extract_eigenbeams(svd: ChannelSvd, t: int) -> EigenbeamSet:
    t = _check_rank(svd, t)
    return EigenbeamSet(svd.V[:, :t].copy(), svd.singular_values[:t].copy(), t)


def effective_precoder(beams: EigenbeamSet, D) -> np.ndarray:
    """Project digital precoders onto the eigenbeam subspace: ``W^H D[k]``.

    ``D`` is ``(N, S)`` or ``(K, N, S)``; ``S`` must equal the rank budget.
    """
    d = np.asarray(D)
    if d.ndim not in (2, 3):
        raise ShapeError(f"precoder must be 2D or 3D, got shape {d.shape}")
    n, s = d.shape[-2:]
    if n != beams.num_elements or s != beams.rank_budget:
        raise ShapeError(f"precoder is {n}x{s}, beams need {beams.num_elements}x{beams.rank_budget}")
    return beams.W.conj().T @ d


def write_eigenbeams_csv(path, beams: EigenbeamSet) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["beam", "element", "real", "imag"])
        for b in range(beams.rank_budget):
            for n, val in enumerate(beams.W[:, b]):
                w.writerow([b, n, repr(float(val.real)), repr(float(val.imag))])


def write_profile_csv(path, profile: RankProfile) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "fraction"])
        for i, f in enumerate(profile.cumulative_power, start=1):
            w.writerow([i, repr(float(f))])
