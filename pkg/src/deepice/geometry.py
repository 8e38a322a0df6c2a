"""Hyperplanes through D data points and their sign rows over a dataset."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .combinatorics import rank_combination
from .core import LEAD_TOL, Dataset, DegenerateError, Hyperplane, pack_bits, popcount

EPS = 1e-9
# cofactor norm below this fraction of the Hadamard bound means rank deficiency
RANK_TOL = 1e-13


def fit_normals(simplices: np.ndarray, combos: np.ndarray | None = None) -> np.ndarray:
    """Canonical homogeneous normals for a batch of point D-tuples.

    ``simplices`` has shape ``(B, D, D)``: B groups of D points in R^D.  The
    normal of each group spans the null space of the ``D x (D+1)`` system
    ``[x_i, 1] . w = 0``; its j-th coordinate is the signed minor obtained by
    deleting column j, each minor evaluated by LU with partial pivoting.
    """
    simplices = np.asarray(simplices, dtype=np.float64)
    B, D, _ = simplices.shape
    A = np.concatenate([simplices, np.ones((B, D, 1))], axis=2)
    W = np.empty((B, D + 1))
    for j in range(D + 1):
        cols = [c for c in range(D + 1) if c != j]
        W[:, j] = (-1) ** j * np.linalg.det(A[:, :, cols])

    norms = np.linalg.norm(W, axis=1)
    bound = np.prod(np.linalg.norm(A, axis=2), axis=1)
    bad = ~(norms > RANK_TOL * bound)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        combo = None if combos is None else combos[i]
        raise DegenerateError(f"points of combination {None if combo is None else tuple(combo)} "
                              "are affinely dependent", combo)

    W /= norms[:, None]
    # first coordinate that is not (numerically) zero must be positive
    lead = np.argmax(np.abs(W) > LEAD_TOL, axis=1)
    flip = W[np.arange(B), lead] < 0
    W[flip] *= -1.0
    return W + 0.0


def signed_distances(normals: np.ndarray, ds: Dataset, eps: float = EPS) -> np.ndarray:
    """``w . x_bar`` for every normal and point; values within ``eps`` snap to 0."""
    d = np.atleast_2d(normals) @ ds.homogeneous.T
    d[np.abs(d) <= eps] = 0.0
    return d


def sign_masks(normals: np.ndarray, ds: Dataset, eps: float = EPS) -> tuple:
    """Packed ``(nonneg, strictpos)`` rows for each normal."""
    d = signed_distances(normals, ds, eps)
    return pack_bits(d >= 0.0), pack_bits(d > 0.0)


def check_general_position(nonneg: np.ndarray, strict: np.ndarray, D: int, combos: np.ndarray) -> None:
    on_plane = popcount(nonneg ^ strict)
    bad = np.flatnonzero(on_plane != D)
    if bad.size:
        i = int(bad[0])
        raise DegenerateError(
            f"hyperplane through {tuple(combos[i])} has {int(on_plane[i])} points on it "
            f"(expected {D}); data are not in general position", combos[i])


def fit_hyperplane(ds: Dataset, combo: Sequence[int], eps: float = EPS) -> Hyperplane:
    """Fit the hyperplane spanned by the D points ``combo`` and compute its sign row."""
    combo = tuple(int(c) for c in combo)
    rank = rank_combination(combo)
    if len(combo) != ds.dim:
        raise ValueError(f"need exactly D={ds.dim} points, got {len(combo)}")
    combos = np.array([combo])
    w = fit_normals(ds.points[combos], combos)[0]
    nonneg, strict = sign_masks(w, ds, eps)
    return Hyperplane(normal=w, defining_rank=rank, nonneg_mask=nonneg[0],
                      strictpos_mask=strict[0], combo=combo)


def sign_row(h: Hyperplane, ds: Dataset, eps: float = EPS) -> tuple:
    nonneg, strict = sign_masks(h.normal, ds, eps)
    return nonneg[0], strict[0]


def fit_from_points(points: np.ndarray) -> np.ndarray:
    """Canonical normal of the hyperplane through D given points (shape (D, D))."""
    points = np.asarray(points, dtype=np.float64)
    return fit_normals(points[None])[0]
