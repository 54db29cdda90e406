"""Cover classes, norms and dual norms, membership, and the closed-form
approximate robustness level.

A cover is either a norm ball {y : ||y - center|| <= radius} for one of the
supported norms, or a half-space offset along the safe-set row itself,
{y : a^T y + b >= offset}. For a norm ball the worst safety level over the
ball has the closed form b + a^T center - radius * ||a||_*, which is affine
in (center, radius); a brute-force boundary-grid oracle is provided for
tests only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Union

import numpy as np

_EIG_TOL = 1e-10
_DEFAULT_TOL = 1e-9

REGULARIZER_KINDS = ("none", "radius", "radius_squared")


@dataclass(frozen=True)
class NormSpec:
    """A norm on output space: l1, l2, linf, or ||y||_Q = sqrt(y^T Q y) for
    symmetric positive definite Q."""

    kind: str
    Q: np.ndarray | None = None

    def __post_init__(self):
        if self.kind in ("l1", "l2", "linf"):
            if self.Q is not None:
                raise ValueError(f"norm {self.kind!r} takes no Q matrix")
            return
        if self.kind != "q":
            raise ValueError(f"unknown norm kind {self.kind!r}")
        Q = np.asarray(self.Q, dtype=np.float64)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or not np.isfinite(Q).all():
            raise ValueError("Q must be a finite square matrix")
        if not np.allclose(Q, Q.T, atol=1e-10):
            raise ValueError("Q must be symmetric")
        Q = 0.5 * (Q + Q.T)
        w = np.linalg.eigvalsh(Q)
        if w.min() <= _EIG_TOL:
            raise ValueError(
                f"Q must be positive definite (min eigenvalue {w.min():.3e})"
            )
        object.__setattr__(self, "Q", Q)
        Q.setflags(write=False)

    def norm(self, z: np.ndarray) -> np.ndarray:
        """Norm of a vector, or of each row of a 2-D array."""
        z = np.asarray(z, dtype=np.float64)
        if self.kind == "l1":
            return np.abs(z).sum(axis=-1)
        if self.kind == "l2":
            return np.sqrt((z * z).sum(axis=-1))
        if self.kind == "linf":
            return np.abs(z).max(axis=-1)
        quad = ((z @ self.Q) * z).sum(axis=-1)
        return np.sqrt(np.maximum(quad, 0.0))

    def dual(self, a: np.ndarray) -> float:
        """Dual norm sup{x^T a : ||x|| <= 1}. Pairs: l1<->linf, l2<->l2,
        Q <-> Q^{-1}."""
        a = np.asarray(a, dtype=np.float64)
        if not np.isfinite(a).all():
            raise ValueError("dual norm needs a finite vector")
        if self.kind == "l1":
            return float(np.abs(a).max())
        if self.kind == "l2":
            return float(np.sqrt(a @ a))
        if self.kind == "linf":
            return float(np.abs(a).sum())
        return float(np.sqrt(max(a @ np.linalg.solve(self.Q, a), 0.0)))

    def to_dict(self) -> dict:
        if self.kind == "q":
            return {"kind": "q", "Q": self.Q.tolist()}
        return {"kind": self.kind}


def normspec_from_dict(d: dict) -> NormSpec:
    kind = d.get("kind")
    if kind == "q":
        return NormSpec("q", np.asarray(d["Q"], dtype=np.float64))
    return NormSpec(kind)


@dataclass(frozen=True)
class NormBall:
    """Cover parameters (center, radius) for a fixed norm; radius > 0."""

    norm: NormSpec
    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=np.float64)
        if c.ndim != 1 or not np.isfinite(c).all():
            raise ValueError("ball center must be a finite vector")
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ValueError("ball radius must be positive")
        object.__setattr__(self, "center", c)
        c.setflags(write=False)

    @property
    def n_params(self) -> int:
        return self.center.shape[0] + 1

    def to_dict(self) -> dict:
        return {
            "class": "norm_ball",
            "norm": self.norm.to_dict(),
            "center": self.center.tolist(),
            "radius": float(self.radius),
        }


@dataclass(frozen=True)
class HalfSpace:
    """Cover {y : a^T y + b >= offset}, parameterized along the safe-set
    row itself; the single scalar is the certified level."""

    offset: float

    def __post_init__(self):
        if not np.isfinite(self.offset):
            raise ValueError("half-space offset must be finite")

    @property
    def n_params(self) -> int:
        return 1

    def to_dict(self) -> dict:
        return {"class": "half_space", "offset": float(self.offset)}


CoverParams = Union[NormBall, HalfSpace]


def cover_from_dict(d: dict) -> CoverParams:
    cls = d.get("class")
    if cls == "norm_ball":
        return NormBall(
            norm=normspec_from_dict(d["norm"]),
            center=np.asarray(d["center"], dtype=np.float64),
            radius=float(d["radius"]),
        )
    if cls == "half_space":
        return HalfSpace(offset=float(d["offset"]))
    raise ValueError(f"unknown cover class {cls!r}")


@dataclass(frozen=True)
class Regularizer:
    """Size penalty v on the cover, weighted by lam >= 0 in the objective.
    v is nonnegative, convex, and nondecreasing in the radius."""

    kind: str = "none"
    lam: float = 0.0

    def __post_init__(self):
        if self.kind not in REGULARIZER_KINDS:
            raise ValueError(
                f"unknown regularizer {self.kind!r}; expected one of {REGULARIZER_KINDS}"
            )
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise ValueError("regularizer weight must be >= 0")

    def value(self, radius: float) -> float:
        if self.kind == "none":
            return 0.0
        if self.kind == "radius":
            return radius
        return radius * radius

    def derivative(self, radius: float) -> float:
        if self.kind == "none":
            return 0.0
        if self.kind == "radius":
            return 1.0
        return 2.0 * radius

    def to_dict(self) -> dict:
        return {"kind": self.kind, "lambda": float(self.lam)}


def regularizer_from_dict(d: dict) -> Regularizer:
    return Regularizer(kind=d.get("kind", "none"), lam=float(d.get("lambda", 0.0)))


def contains(cover: CoverParams, row, y: np.ndarray, tol: float = _DEFAULT_TOL):
    """Membership of y (vector or batch rows) in the cover, with an
    absolute tolerance on the defining inequality."""
    y = np.asarray(y, dtype=np.float64)
    if isinstance(cover, NormBall):
        res = cover.norm.norm(y - cover.center) <= cover.radius + tol
    else:
        a, b = row
        res = (y @ a + b) >= cover.offset - tol
    if y.ndim == 1:
        return bool(res)
    return res


def approx_robustness(cover: CoverParams, row) -> float:
    """Worst safety level over the cover: the certified lower bound that a
    point inside the cover can have. Norm ball: b + a^T center - radius *
    dual(a), exact by norm duality. Half-space: the offset itself."""
    if isinstance(cover, HalfSpace):
        return float(cover.offset)
    a, b = row
    return float(b + a @ cover.center - cover.radius * cover.norm.dual(a))


def _boundary_directions(norm: NormSpec, dim: int, n_grid: int) -> np.ndarray:
    """Unit-norm directions: an angular grid in 2-D (rounded up to a
    multiple of 8 so diagonal and axis vertices are hit exactly); random
    Gaussian directions plus axis and sign-vertex enumeration otherwise
    (polyhedral ball extrema sit on those vertices)."""
    if dim == 2:
        n = int(8 * np.ceil(max(n_grid, 8) / 8))
        phi = 2.0 * np.pi * np.arange(n) / n
        w = np.column_stack([np.cos(phi), np.sin(phi)])
    else:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(20260810)))
        w = rng.standard_normal((int(n_grid), dim))
        w = w[np.abs(w).sum(axis=1) > 0]
        corners = np.array(
            [[float(b) for b in np.binary_repr(k, dim)] for k in range(2**dim)]
        ) * 2.0 - 1.0
        w = np.vstack([w, np.eye(dim), corners])
    return w / norm.norm(w)[:, None]


def approx_robustness_oracle(
    cover: NormBall, row, n_grid: int = 100_000, directions=None
) -> float:
    """Brute-force min of the safety level over ball boundary points
    center + radius * u. Test-only reference; converges to
    :func:`approx_robustness` from above as the direction set densifies.
    ``directions`` overrides the generated grid (rows of unit norm)."""
    if not isinstance(cover, NormBall):
        raise ValueError("the boundary oracle applies to norm balls only")
    a, b = row
    if directions is None:
        u = _boundary_directions(cover.norm, cover.center.shape[0], n_grid)
        proj = u @ a
        worst = np.minimum(proj, -proj).min()  # antipodal pairs come free
    else:
        u = np.atleast_2d(np.asarray(directions, dtype=np.float64))
        worst = (u @ a).min()
    return float(b + a @ cover.center + cover.radius * worst)


def volume_penalty(reg: Regularizer, cover: CoverParams) -> float:
    """Unweighted size proxy v of the cover (0, r, or r^2)."""
    if isinstance(cover, HalfSpace):
        if reg.kind != "none":
            raise ValueError("half-space covers have no radius to regularize")
        return 0.0
    return reg.value(cover.radius)


def fit_pca_qnorm(samples: np.ndarray) -> NormSpec:
    """Ellipsoid norm aligned with the principal components of the data:
    Q = (Sigma + gamma I)^{-1} with Sigma the unbiased sample covariance
    and a tiny ridge gamma = 1e-8 tr(Sigma)/dim against singular Sigma."""
    y = np.asarray(samples, dtype=np.float64)
    if y.ndim != 2:
        raise ValueError("samples must be an (N, dim) matrix")
    n, dim = y.shape
    if n <= dim:
        raise ValueError(f"need more samples than dimensions (got {n} x {dim})")
    sigma = np.cov(y, rowvar=False, ddof=1).reshape(dim, dim)
    gamma = 1e-8 * np.trace(sigma) / dim
    ridged = sigma + gamma * np.eye(dim)
    w = np.linalg.eigvalsh(ridged)
    if w.min() <= _EIG_TOL * max(1.0, w.max()):
        raise ValueError(
            "sample covariance is singular even after the ridge; "
            "the outputs appear to be constant"
        )
    return NormSpec("q", np.linalg.inv(ridged))


# module-level op aliases, matching the documented surface


def dual_norm(norm: NormSpec, a: np.ndarray) -> float:
    return norm.dual(a)


def load_cover_class(path_or_dict) -> dict:
    """Cover-class spec as a plain dict: {"class": "norm_ball", "norm":
    "l2"|"l1"|"linf"|"q_pca"} or {"class": "half_space"}; "class" defaults
    to norm_ball. An explicit Q ellipse uses {"norm": "q", "Q": [[...]]}."""
    if isinstance(path_or_dict, dict):
        d = path_or_dict
    else:
        with open(path_or_dict) as fh:
            d = json.load(fh)
    cls = d.get("class", "norm_ball")
    if cls == "half_space":
        return {"class": "half_space"}
    if cls != "norm_ball":
        raise ValueError(f"unknown cover class {cls!r}")
    norm = d.get("norm", "l2")
    if isinstance(norm, dict):
        return {"class": "norm_ball", "norm": norm}
    if norm == "q":
        return {"class": "norm_ball", "norm": {"kind": "q", "Q": d["Q"]}}
    if norm in ("l1", "l2", "linf", "q_pca"):
        return {"class": "norm_ball", "norm": norm}
    raise ValueError(f"unknown norm {norm!r} in cover-class spec")
