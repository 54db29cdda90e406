"""Input distributions and seeded sampling.

All randomness is drawn from Philox counter-based generators keyed through
``numpy.random.SeedSequence`` spawn paths, so a single 64-bit seed fans out
into named, mutually independent streams:

* stream 0 — assessment sampling
* stream 1 — validation sampling
* stream 2 — covariance-fitting samples (fresh-split mode)

Within one draw, every primitive (directions, radii, signs, component
choices, marginals) gets its own substream. A consequence worth relying on:
samples are prefix-nested — ``sample(d, m, seed)`` equals the first ``m``
rows of ``sample(d, n, seed)`` for any ``n >= m``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

STREAM_SAMPLING = 0
STREAM_VALIDATION = 1
STREAM_QFIT = 2

_NORM_KINDS = ("l1", "l2", "linf")


def substream(seed: int, *path: int) -> np.random.Generator:
    """Independent generator for the given seed and stream path."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def _unit_ball_draw(norm: str, dim: int, n: int, seed: int, path: tuple) -> np.ndarray:
    """n volume-uniform points in the unit ball of the norm, under a stream path."""
    if norm == "linf":
        return substream(seed, *path, 0).uniform(-1.0, 1.0, (n, dim))
    if norm == "l2":
        g = substream(seed, *path, 0).standard_normal((n, dim))
        nrm = np.maximum(np.sqrt((g * g).sum(axis=1)), np.finfo(float).tiny)
        u = substream(seed, *path, 1).random(n) ** (1.0 / dim)
        return g * (u / nrm)[:, None]
    if norm == "l1":
        e = substream(seed, *path, 0).standard_exponential((n, dim))
        tot = np.maximum(e.sum(axis=1), np.finfo(float).tiny)
        signs = np.where(substream(seed, *path, 1).random((n, dim)) < 0.5, -1.0, 1.0)
        u = substream(seed, *path, 2).random(n) ** (1.0 / dim)
        return signs * e * (u / tot)[:, None]
    raise ValueError(f"unsupported norm {norm!r}; expected one of {_NORM_KINDS}")


def uniform_ball_sampler(norm: str, dim: int):
    """Exact volume-uniform sampler for the unit ball of the given norm.

    linf: independent uniforms. l2: Gaussian direction times a U^(1/dim)
    radius. l1: exponential-spacings simplex point with random signs and
    the same radial correction. Returns ``rule(n, seed, stream=0)``.
    """
    if norm not in _NORM_KINDS:
        raise ValueError(f"unsupported norm {norm!r}; expected one of {_NORM_KINDS}")
    if dim < 1:
        raise ValueError("dim must be >= 1")

    def rule(n: int, seed: int, stream: int = STREAM_SAMPLING) -> np.ndarray:
        return _unit_ball_draw(norm, dim, int(n), int(seed), (int(stream),))

    return rule


class InputDistribution:
    """Base for sampleable input descriptions; see the concrete kinds."""

    dim: int

    def _draw(self, n: int, seed: int, path: tuple) -> np.ndarray:
        raise NotImplementedError

    def in_support(self, x: np.ndarray) -> np.ndarray:
        """Boolean membership in the support, batched over rows."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class UniformNormBall(InputDistribution):
    center: np.ndarray
    radius: float
    norm: str = "linf"

    def __post_init__(self):
        c = np.asarray(self.center, dtype=np.float64)
        if c.ndim != 1 or not np.isfinite(c).all():
            raise ValueError("center must be a finite vector")
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ValueError("radius must be positive")
        if self.norm not in _NORM_KINDS:
            raise ValueError(f"unsupported norm {self.norm!r}")
        object.__setattr__(self, "center", c)
        c.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def _draw(self, n, seed, path):
        pts = _unit_ball_draw(self.norm, self.dim, n, seed, path)
        return self.center + self.radius * pts

    def _norm_of(self, z: np.ndarray) -> np.ndarray:
        if self.norm == "l1":
            return np.abs(z).sum(axis=-1)
        if self.norm == "l2":
            return np.sqrt((z * z).sum(axis=-1))
        return np.abs(z).max(axis=-1)

    def in_support(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        return self._norm_of(x - self.center) <= self.radius + 1e-12

    def to_dict(self):
        return {
            "kind": "uniform_norm_ball",
            "norm": self.norm,
            "center": self.center.tolist(),
            "radius": float(self.radius),
        }


@dataclass(frozen=True)
class Gaussian(InputDistribution):
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mean, dtype=np.float64)
        c = np.asarray(self.covariance, dtype=np.float64)
        if m.ndim != 1 or not np.isfinite(m).all():
            raise ValueError("mean must be a finite vector")
        if c.shape != (m.shape[0], m.shape[0]) or not np.isfinite(c).all():
            raise ValueError("covariance must be a finite square matrix matching mean")
        if not np.allclose(c, c.T, atol=1e-10):
            raise ValueError("covariance must be symmetric")
        c = 0.5 * (c + c.T)
        w = np.linalg.eigvalsh(c)
        if w.min() < -1e-10 * max(1.0, abs(w.max())):
            raise ValueError("covariance must be positive semidefinite")
        object.__setattr__(self, "mean", m)
        object.__setattr__(self, "covariance", c)
        m.setflags(write=False)
        c.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def _draw(self, n, seed, path):
        z = substream(seed, *path, 0).standard_normal((n, self.dim))
        w, v = np.linalg.eigh(self.covariance)
        fac = v * np.sqrt(np.clip(w, 0.0, None))
        # row-stable transform keeps prefix nesting exact
        out = (z[:, None, :] * fac[None, :, :]).sum(axis=2)
        return self.mean + out

    def in_support(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        return np.ones(x.shape[0], dtype=bool)

    def to_dict(self):
        return {
            "kind": "gaussian",
            "mean": self.mean.tolist(),
            "covariance": self.covariance.tolist(),
        }


@dataclass(frozen=True)
class UniformMarginal:
    low: float
    high: float

    def __post_init__(self):
        if not (np.isfinite(self.low) and np.isfinite(self.high)):
            raise ValueError("marginal bounds must be finite")
        if self.high < self.low:
            raise ValueError("marginal needs low <= high")

    def draw(self, rng, n):
        return rng.uniform(self.low, self.high, n)

    def contains(self, v):
        return (v >= self.low - 1e-12) & (v <= self.high + 1e-12)

    def to_dict(self):
        return {"kind": "uniform", "low": float(self.low), "high": float(self.high)}


@dataclass(frozen=True)
class GaussianMarginal:
    mean: float
    std: float

    def __post_init__(self):
        if not (np.isfinite(self.mean) and np.isfinite(self.std) and self.std >= 0):
            raise ValueError("marginal needs finite mean and std >= 0")

    def draw(self, rng, n):
        return self.mean + self.std * rng.standard_normal(n)

    def contains(self, v):
        return np.ones_like(np.asarray(v, dtype=float), dtype=bool)

    def to_dict(self):
        return {"kind": "gaussian", "mean": float(self.mean), "std": float(self.std)}


@dataclass(frozen=True)
class Product(InputDistribution):
    marginals: tuple

    def __post_init__(self):
        ms = tuple(self.marginals)
        if not ms:
            raise ValueError("product distribution needs at least one marginal")
        object.__setattr__(self, "marginals", ms)

    @property
    def dim(self) -> int:
        return len(self.marginals)

    def _draw(self, n, seed, path):
        cols = [
            m.draw(substream(seed, *path, i), n) for i, m in enumerate(self.marginals)
        ]
        return np.column_stack(cols)

    def in_support(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        ok = np.ones(x.shape[0], dtype=bool)
        for i, m in enumerate(self.marginals):
            ok &= m.contains(x[:, i])
        return ok

    def to_dict(self):
        return {"kind": "product", "marginals": [m.to_dict() for m in self.marginals]}


@dataclass(frozen=True)
class Mixture(InputDistribution):
    weights: np.ndarray
    components: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        comps = tuple(self.components)
        if w.ndim != 1 or len(comps) != w.shape[0] or not comps:
            raise ValueError("weights and components must align and be non-empty")
        if (w < 0).any() or not np.isclose(w.sum(), 1.0, atol=1e-9):
            raise ValueError("mixture weights must be nonnegative and sum to 1")
        dims = {c.dim for c in comps}
        if len(dims) != 1:
            raise ValueError("mixture components must share one dimension")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", comps)
        w.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    def _draw(self, n, seed, path):
        u = substream(seed, *path, 0).random(n)
        cum = np.cumsum(self.weights)
        idx = np.minimum(
            np.searchsorted(cum, u, side="right"), len(self.components) - 1
        )
        out = np.empty((n, self.dim), dtype=np.float64)
        for c, comp in enumerate(self.components):
            where = idx == c
            cnt = int(where.sum())
            if cnt:
                out[where] = comp._draw(cnt, seed, path + (1 + c,))
        return out

    def in_support(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        ok = np.zeros(x.shape[0], dtype=bool)
        for comp in self.components:
            ok |= comp.in_support(x)
        return ok

    def to_dict(self):
        return {
            "kind": "mixture",
            "weights": self.weights.tolist(),
            "components": [c.to_dict() for c in self.components],
        }


def sample(
    dist: InputDistribution, n: int, seed: int, stream: int = STREAM_SAMPLING
) -> np.ndarray:
    """n i.i.d. draws from the distribution, reproducible in (seed, stream)."""
    if n < 1:
        raise ValueError("need n >= 1 samples")
    return dist._draw(int(n), int(seed), (int(stream),))


def _marginal_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "uniform":
        return UniformMarginal(float(d["low"]), float(d["high"]))
    if kind == "gaussian":
        return GaussianMarginal(float(d["mean"]), float(d["std"]))
    raise ValueError(f"unknown marginal kind {kind!r}")


def distribution_from_dict(d: dict) -> InputDistribution:
    if not isinstance(d, dict):
        raise ValueError("distribution spec must be a JSON object")
    kind = d.get("kind")
    if kind == "uniform_norm_ball":
        return UniformNormBall(
            center=np.asarray(d["center"], dtype=np.float64),
            radius=float(d["radius"]),
            norm=d.get("norm", "linf"),
        )
    if kind == "gaussian":
        return Gaussian(
            mean=np.asarray(d["mean"], dtype=np.float64),
            covariance=np.asarray(d["covariance"], dtype=np.float64),
        )
    if kind == "product":
        return Product(tuple(_marginal_from_dict(m) for m in d["marginals"]))
    if kind == "mixture":
        return Mixture(
            weights=np.asarray(d["weights"], dtype=np.float64),
            components=tuple(distribution_from_dict(c) for c in d["components"]),
        )
    raise ValueError(f"unknown distribution kind {kind!r}")


def load_distribution(path) -> InputDistribution:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"could not parse distribution file {path}: {exc}") from exc
    return distribution_from_dict(data)
