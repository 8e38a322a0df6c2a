"""Fitted networks: construction, prediction, and the JSON model file."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .core import ACTIVATIONS, MAXOUT, RELU, Dataset, DeepIceError, ScoredConfig
from .coreset import FilterParams, coreset_fit
from .geometry import EPS, fit_from_points
from .solver import search

FORMAT_VERSION = 1


class ModelFormatError(DeepIceError, ValueError):
    pass


@dataclass
class Neuron:
    normal: list
    points: list
    sign: int


@dataclass
class Model:
    activation: str
    K: int
    D: int
    neurons: list
    training_loss: int
    fingerprint: str = ""
    seed: Optional[int] = None
    version: str = __version__
    eps: float = EPS
    meta: dict = field(default_factory=dict)

    @property
    def normals(self) -> np.ndarray:
        return np.array([n.normal for n in self.neurons], dtype=np.float64).reshape(self.K, self.D + 1)

    @property
    def signs(self) -> np.ndarray:
        return np.array([n.sign for n in self.neurons], dtype=np.int64)

    def decision_values(self, points) -> np.ndarray:
        X = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if X.shape[1] != self.D:
            raise ValueError(f"model expects {self.D} features, got {X.shape[1]}")
        d = np.hstack([X, np.ones((len(X), 1))]) @ self.normals.T
        d[np.abs(d) <= self.eps] = 0.0
        a = self.signs
        if self.activation == MAXOUT:
            return (d * a).max(axis=1)
        f = None
        for k in range(self.K):
            term = np.maximum(d[:, k], 0.0) if a[k] > 0 else np.minimum(d[:, k], 0.0)
            f = term if f is None else f + term
        return f

    def predict(self, points) -> np.ndarray:
        return np.where(self.decision_values(points) >= 0.0, 1, -1).astype(np.int8)

    def loss(self, ds: Dataset) -> int:
        return int(np.count_nonzero(self.predict(ds.points) != ds.labels))

    # ---- persistence -------------------------------------------------

    def to_dict(self) -> dict:
        d = asdict(self)
        d["format"] = FORMAT_VERSION
        return d

    @classmethod
    def from_dict(cls, d: dict, check: bool = True) -> "Model":
        d = dict(d)
        if d.pop("format", None) != FORMAT_VERSION:
            raise ModelFormatError("unsupported model file format")
        try:
            neurons = [Neuron(**n) for n in d.pop("neurons")]
            model = cls(neurons=neurons, **d)
        except TypeError as exc:
            raise ModelFormatError(str(exc)) from exc
        if model.activation not in ACTIVATIONS or len(neurons) != model.K:
            raise ModelFormatError("inconsistent model header")
        if check:
            for n in neurons:
                refit = fit_from_points(np.array(n.points))
                if not np.allclose(refit, n.normal, rtol=0, atol=1e-9):
                    raise ModelFormatError("stored normal does not match its defining points")
        return model

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    @classmethod
    def load(cls, path) -> "Model":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def model_from_config(scored: ScoredConfig, ds: Dataset, seed: Optional[int] = None, eps: float = EPS,
                      **meta) -> Model:
    """Turn a search result into a dataset-independent model.

    The stored training loss is recomputed by prediction and must agree with
    the loss the search reported.
    """
    if scored.defining_points is None:
        raise ValueError("configuration carries no defining points")
    neurons = []
    for pts, a in zip(scored.defining_points, scored.config.assignment):
        w = fit_from_points(np.array(pts))
        neurons.append(Neuron(normal=[float(v) for v in w], points=[list(p) for p in pts], sign=int(a)))
    model = Model(scored.config.activation, scored.config.k, ds.dim, neurons, int(scored.loss),
                  fingerprint=ds.fingerprint(), seed=seed, eps=eps, meta=dict(meta))
    replay = model.loss(ds)
    if replay != scored.loss:
        raise DeepIceError(f"model replays to loss {replay}, search reported {scored.loss}")
    return model


def fit(ds: Dataset, K: int, activation: str = MAXOUT, *, method: str = "exact",
        params: Optional[FilterParams] = None, seed: Optional[int] = None, eps: float = EPS,
        **kwargs) -> Model:
    """Train a K-unit network on ``ds`` (``method`` is ``exact`` or ``coreset``)."""
    if activation not in (MAXOUT, RELU):
        raise ValueError(f"unknown activation {activation!r}")
    if method == "exact":
        res = search(ds, K, activation, eps=eps, **kwargs)
        return model_from_config(res.best, ds, seed=seed, eps=eps, method="exact",
                                 candidates=res.stats.candidates)
    if method == "coreset":
        params = params or FilterParams(seed=0 if seed is None else seed)
        res = coreset_fit(ds, K, activation, params, eps=eps, **kwargs)
        return model_from_config(res.best, ds, seed=seed, eps=eps, method="coreset",
                                 layers=len(res.rounds_log))
    raise ValueError(f"unknown method {method!r}")


def decision_grid(model: Model, lo, hi, resolution: int = 200) -> np.ndarray:
    """Predictions on a regular grid over a 2-D box: rows of ``(x, y, label)``."""
    if model.D != 2:
        raise ValueError("decision grids are only defined for D = 2")
    xs = np.linspace(lo[0], hi[0], resolution)
    ys = np.linspace(lo[1], hi[1], resolution)
    gx, gy = np.meshgrid(xs, ys)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    return np.column_stack([pts, model.predict(pts)])


def predict(model: Model, points) -> np.ndarray:
    """+1/-1 labels for ``points`` (rows of length ``model.D``)."""
    return model.predict(points)
