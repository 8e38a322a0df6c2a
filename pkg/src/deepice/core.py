"""Domain types shared across the package.

Sign rows are stored as packed ``uint64`` bitsets, one bit per data point
(bit ``n`` of word ``n // 64``), so that unions, intersections and 0-1 loss
counts become word-parallel bit operations followed by a popcount.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

MAXOUT = "maxout"
RELU = "relu"
ACTIVATIONS = (MAXOUT, RELU)


class DeepIceError(Exception):
    """Base class for errors raised by this package."""


class DegenerateError(DeepIceError):
    """Points are affinely dependent or violate general position."""

    def __init__(self, message: str, combo: Optional[Sequence[int]] = None):
        super().__init__(message)
        self.combo = None if combo is None else tuple(int(i) for i in combo)


class InvalidCombinationError(DeepIceError, ValueError):
    pass


class CacheMissError(DeepIceError, KeyError):
    pass


class ConfigurationError(DeepIceError):
    pass


class NoConfigError(DeepIceError):
    """The dataset is too small to host a single K-combination of hyperplanes."""


class BudgetExceededError(DeepIceError):
    pass


# --------------------------------------------------------------------------
# bitsets
# --------------------------------------------------------------------------

def n_words(n_bits: int) -> int:
    return max(1, (n_bits + 63) // 64)


def pack_bits(bools: np.ndarray) -> np.ndarray:
    """Pack a boolean array ``(..., N)`` into ``(..., W)`` little-endian uint64 words."""
    bools = np.asarray(bools, dtype=bool)
    n = bools.shape[-1]
    w = n_words(n)
    padded = np.zeros(bools.shape[:-1] + (w * 64,), dtype=bool)
    padded[..., :n] = bools
    packed = np.packbits(padded, axis=-1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64, copy=False)


def unpack_bits(words: np.ndarray, n_bits: int) -> np.ndarray:
    words = np.ascontiguousarray(np.asarray(words, dtype="<u8"))
    as_bytes = words.view(np.uint8)
    bits = np.unpackbits(as_bytes, axis=-1, bitorder="little")
    return bits[..., :n_bits].astype(bool)


def full_mask(n_bits: int) -> np.ndarray:
    return pack_bits(np.ones(n_bits, dtype=bool))


def popcount(words: np.ndarray) -> np.ndarray:
    """Number of set bits along the last (word) axis."""
    return np.bitwise_count(words).sum(axis=-1, dtype=np.int64)


def bits_to_int(words: np.ndarray) -> int:
    """Convert one packed row to a Python integer bitset."""
    out = 0
    for i, word in enumerate(np.asarray(words, dtype=np.uint64).tolist()):
        out |= int(word) << (64 * i)
    return out


# --------------------------------------------------------------------------
# dataset
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Dataset:
    """N points in R^D with labels in {+1, -1}.

    General position is not checked here; violations surface when the
    hyperplanes are fitted.
    """

    points: np.ndarray
    labels: np.ndarray
    ids: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        points = np.array(self.points, dtype=np.float64, copy=True)
        if points.ndim != 2:
            if points.size == 0:
                points = points.reshape(0, 2)
            else:
                raise ValueError("points must be a 2-D array of shape (N, D)")
        labels = np.array(self.labels, dtype=np.int8, copy=True).reshape(-1)
        if labels.shape[0] != points.shape[0]:
            raise ValueError(f"{points.shape[0]} points but {labels.shape[0]} labels")
        if points.shape[1] < 2:
            raise ValueError("D >= 2 is required")
        if not np.all(np.isin(labels, (-1, 1))):
            raise ValueError("labels must be +1 or -1")
        if not np.all(np.isfinite(points)):
            raise ValueError("points must be finite")
        if len(points) > 1 and len(np.unique(points, axis=0)) != len(points):
            raise ValueError("dataset contains duplicate points")
        ids = np.arange(len(points)) if self.ids is None else np.array(self.ids, dtype=np.int64)
        if ids.shape != (len(points),):
            raise ValueError("ids must have one entry per point")
        for arr in (points, labels, ids):
            arr.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "ids", ids)
        pos = pack_bits(labels > 0)
        pos.setflags(write=False)
        object.__setattr__(self, "_labels_pos", pos)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n

    @property
    def labels_pos(self) -> np.ndarray:
        """Packed bitset of positively labelled points."""
        return self._labels_pos  # type: ignore[attr-defined]

    @property
    def homogeneous(self) -> np.ndarray:
        """Points with a trailing 1 appended, shape (N, D+1)."""
        return np.hstack([self.points, np.ones((self.n, 1))])

    def subset(self, indices: Sequence[int]) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.points[idx], self.labels[idx], self.ids[idx])

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.points, dtype="<f8").tobytes())
        h.update(np.ascontiguousarray(self.labels, dtype=np.int8).tobytes())
        return h.hexdigest()


# --------------------------------------------------------------------------
# hyperplanes and configurations
# --------------------------------------------------------------------------

# coordinates this small (on a unit normal) do not decide the orientation
LEAD_TOL = 1e-12


def canonicalize_normal(w) -> np.ndarray:
    """Unit-length representative of ``w`` with its first nonzero coordinate positive."""
    w = np.asarray(w, dtype=np.float64).reshape(-1)
    norm = np.linalg.norm(w)
    if not np.isfinite(norm) or norm == 0.0:
        raise DegenerateError("cannot canonicalize a zero normal vector")
    # already-unit inputs are left untouched so that canonicalization is exactly idempotent
    if abs(norm - 1.0) > 4 * np.finfo(np.float64).eps:
        w = w / norm
    nz = np.flatnonzero(np.abs(w) > LEAD_TOL)
    if w[nz[0]] < 0:
        w = -w
    return w + 0.0  # drop negative zeros


@dataclass(frozen=True, eq=False)
class Hyperplane:
    normal: np.ndarray
    defining_rank: int
    nonneg_mask: np.ndarray
    strictpos_mask: np.ndarray
    combo: tuple = ()

    def on_plane_count(self) -> int:
        return int(popcount(self.nonneg_mask ^ self.strictpos_mask))


@dataclass(frozen=True, order=False)
class Config:
    ranks: tuple
    assignment: tuple
    activation: str = MAXOUT

    def __post_init__(self):
        ranks = tuple(int(r) for r in self.ranks)
        assignment = tuple(int(a) for a in self.assignment)
        if len(ranks) != len(assignment):
            raise ValueError("ranks and assignment must have the same length")
        if any(b <= a for a, b in zip(ranks, ranks[1:])):
            raise ValueError(f"ranks must be strictly increasing, got {ranks}")
        if any(a not in (-1, 1) for a in assignment):
            raise ValueError("assignment signs must be +1 or -1")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        object.__setattr__(self, "ranks", ranks)
        object.__setattr__(self, "assignment", assignment)

    @property
    def k(self) -> int:
        return len(self.ranks)


@dataclass(frozen=True)
class ScoredConfig:
    """A configuration together with its 0-1 loss on some reference dataset.

    ``defining_points`` holds, per hidden unit, the D points spanning its
    hyperplane; it lets a configuration outlive the indexing of the dataset
    it was found on (coreset layers, model files).
    """

    config: Config
    loss: int
    source_block: Optional[tuple] = None
    defining_points: Optional[tuple] = None

    def __post_init__(self):
        if self.loss < 0:
            raise ValueError("loss must be nonnegative")

    @property
    def key(self) -> tuple:
        return (self.loss, self.config.ranks, self.config.assignment)
