"""Sample-size rule and solvers for the sampled cover-fitting problem.

For a fixed safe-set row (a, b) and N sampled outputs y_j, the problem is

    maximize    r_hat(theta) - lam * v(theta)
    subject to  y_j in cover(theta) for every j,

over the cover class. Half-spaces admit a closed form. For norm balls the
radius is eliminated through r(c) = max_j ||y_j - c||, leaving the convex
nonsmooth minimization of

    phi(c) = -a^T c + ||a||_* r(c) + lam * v(r(c))

over the center, handled by a projected subgradient method with
Polyak-style steps and best-iterate tracking, plus a derivative-free
polish. Feasibility of every sample holds by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .geometry import (
    CoverParams,
    HalfSpace,
    NormBall,
    NormSpec,
    Regularizer,
    approx_robustness,
)

STATUS_OPTIMAL = "optimal"
STATUS_ITERATION_LIMIT = "iteration_limit"
STATUS_RADIUS_CAPPED = "radius_capped"


def sample_size(eps: float, delta: float, p: int) -> int:
    """Number of independent samples that makes the fitted cover an
    eps-cover, and its level a valid bound, with confidence 1 - delta:
    ceil((2/eps) * (ln(1/delta) + p)) for a p-parameter class."""
    if not (0.0 < eps <= 1.0):
        raise ValueError("eps must lie in (0, 1]")
    if not (0.0 < delta <= 1.0):
        raise ValueError("delta must lie in (0, 1]")
    if p < 1:
        raise ValueError("p must be a positive integer")
    val = (2.0 / eps) * (math.log(1.0 / delta) + p)
    # snap exact-integer products that float noise nudged off
    if abs(val - round(val)) < 1e-9:
        return int(round(val))
    return int(math.ceil(val))


@dataclass(frozen=True)
class CoverClass:
    """Which cover family to fit: a norm ball with a concrete norm, or the
    half-space along the safe-set row."""

    kind: str
    norm: NormSpec | None = None

    def __post_init__(self):
        if self.kind == "norm_ball":
            if self.norm is None:
                raise ValueError("norm_ball class needs a NormSpec")
        elif self.kind == "half_space":
            if self.norm is not None:
                raise ValueError("half_space class takes no norm")
        else:
            raise ValueError(f"unknown cover class {self.kind!r}")

    def n_params(self, output_dim: int) -> int:
        return output_dim + 1 if self.kind == "norm_ball" else 1


@dataclass(frozen=True)
class SolverOptions:
    max_iter: int = 50_000
    tol_obj: float = 1e-7  # relative best-value improvement over the window
    tol_step: float = 1e-12  # center movement per iteration, window-persistent
    window: int = 200
    radius_cap_multiplier: float = 1e3
    polish: bool = True

    def __post_init__(self):
        if self.max_iter < 1 or self.window < 1:
            raise ValueError("max_iter and window must be positive")
        if self.radius_cap_multiplier < 1.0:
            raise ValueError("radius cap multiplier must be >= 1")


@dataclass(frozen=True)
class ScenarioProblem:
    outputs: np.ndarray
    row: tuple
    cover: CoverClass
    regularizer: Regularizer = Regularizer()
    options: SolverOptions = SolverOptions()

    def __post_init__(self):
        y = np.atleast_2d(np.asarray(self.outputs, dtype=np.float64))
        if y.shape[0] < 1 or not np.isfinite(y).all():
            raise ValueError("need at least one finite output sample")
        a = np.asarray(self.row[0], dtype=np.float64)
        b = float(self.row[1])
        if a.shape != (y.shape[1],) or not np.isfinite(a).all() or not np.isfinite(b):
            raise ValueError("row (a, b) must be finite and match the output dim")
        if self.cover.kind == "half_space" and self.regularizer.kind != "none":
            raise ValueError("half-space covers have no radius to regularize")
        object.__setattr__(self, "outputs", y)
        object.__setattr__(self, "row", (a, b))
        y.setflags(write=False)
        a.setflags(write=False)

    @property
    def n_samples(self) -> int:
        return self.outputs.shape[0]


@dataclass(frozen=True)
class ScenarioSolution:
    theta_star: CoverParams
    r_hat: float
    objective: float
    iterations: int
    status: str


def _safety_levels(y: np.ndarray, a: np.ndarray, b: float) -> np.ndarray:
    # per-sample dot products: batched gemv accumulates differently and
    # would break exact agreement with a sample-by-sample evaluation
    levels = np.fromiter((yj @ a for yj in y), dtype=np.float64, count=y.shape[0])
    return levels + b


def solve_half_space(problem: ScenarioProblem) -> ScenarioSolution:
    """Exact closed form: the largest offset keeping every sample inside is
    the minimum sample safety level."""
    if problem.cover.kind != "half_space":
        raise ValueError("problem does not use the half-space class")
    a, b = problem.row
    levels = _safety_levels(problem.outputs, a, b)
    rho = float(levels.min())
    theta = HalfSpace(offset=rho)
    return ScenarioSolution(
        theta_star=theta,
        r_hat=approx_robustness(theta, problem.row),
        objective=rho,
        iterations=0,
        status=STATUS_OPTIMAL,
    )


def _farthest(norm: NormSpec, y: np.ndarray, c: np.ndarray):
    dists = norm.norm(y - c)
    j = int(np.argmax(dists))  # argmax takes the lowest index on ties
    return float(dists[j]), j


def _dist_subgradient(norm: NormSpec, z: np.ndarray, dist: float) -> np.ndarray:
    """Subgradient of c -> ||y_j - c|| at z = y_j - c."""
    d = z.shape[0]
    if dist <= 0.0:
        return np.zeros(d)
    if norm.kind == "l2":
        return -z / dist
    if norm.kind == "l1":
        return -np.sign(z)
    if norm.kind == "linf":
        i = int(np.argmax(np.abs(z)))
        g = np.zeros(d)
        g[i] = -np.sign(z[i])
        return g
    return -(norm.Q @ z) / dist


def _diameter(norm: NormSpec, y: np.ndarray) -> float:
    n = y.shape[0]
    if n <= 4096:
        best = 0.0
        for i in range(n - 1):
            best = max(best, float(norm.norm(y[i + 1 :] - y[i]).max()))
        return best
    # surrogate within a factor two of the true diameter
    return 2.0 * float(norm.norm(y - y.mean(axis=0)).max())


def _recession_direction(norm: NormSpec, a: np.ndarray) -> np.ndarray:
    """Unit-norm direction maximizing a^T w; moving the center along it
    trades radius for safety margin at the breakeven rate ||a||_*."""
    if norm.kind == "l2":
        return a / float(np.sqrt(a @ a))
    if norm.kind == "l1":
        i = int(np.argmax(np.abs(a)))
        w = np.zeros(a.shape[0])
        w[i] = np.sign(a[i])
        return w
    if norm.kind == "linf":
        return np.sign(a)
    w = np.linalg.solve(norm.Q, a)
    return w / float(norm.norm(w))


def _cap_projection(norm, y, c, anchor, cap):
    """Pull c toward the anchor until max_j ||y_j - c|| <= cap."""
    lo, hi = 0.0, 1.0  # t=1 is the anchor, feasible by construction
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        cand = c + mid * (anchor - c)
        if _farthest(norm, y, cand)[0] <= cap:
            hi = mid
        else:
            lo = mid
    return c + hi * (anchor - c)


def _smooth_polish(norm, y, a, dual, reg, c0, scale, phi_parts, capped, cap):
    """Continuation polish for smooth norms (l2, q): replace the max of
    distances by a softmax with shrinking temperature and run L-BFGS with
    analytic gradients. Derivative-free steps stall on the max kink; the
    smoothed surrogate does not, and its bias mu*log(N) vanishes with mu."""
    lam = reg.lam
    q = norm.Q if norm.kind == "q" else None

    def make_fg(mu):
        def fg(c):
            diff = c - y
            if q is None:
                dist = np.sqrt(np.maximum((diff * diff).sum(axis=1), 1e-300))
                grads = diff / dist[:, None]
            else:
                dq = diff @ q
                dist = np.sqrt(np.maximum((dq * diff).sum(axis=1), 1e-300))
                grads = dq / dist[:, None]
            top = float(dist.max())
            e = np.exp((dist - top) / mu)
            z = float(e.sum())
            r_mu = top + mu * np.log(z)  # log-sum-exp overestimate of max
            grad_r = (e / z) @ grads
            val = -float(a @ c) + dual * r_mu + lam * reg.value(r_mu)
            grad = -a + (dual + lam * reg.derivative(r_mu)) * grad_r
            return val, grad

        return fg

    best_val, best_r, _ = phi_parts(c0)
    best_c = np.array(c0)
    c = np.array(c0)
    for mu in (1e-3, 1e-5, 1e-7, 1e-9, 1e-11):
        res = minimize(
            make_fg(mu * scale),
            c,
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": 500, "ftol": 1e-18, "gtol": 1e-14},
        )
        c = res.x
        val, r, _ = phi_parts(c)
        if val < best_val and (not capped or r <= cap * (1 + 1e-12)):
            best_val, best_c, best_r = val, c.copy(), r
    return best_val, best_c, best_r


def solve_norm_ball(problem: ScenarioProblem) -> ScenarioSolution:
    if problem.cover.kind != "norm_ball":
        raise ValueError("problem does not use the norm-ball class")
    y = problem.outputs
    a, b = problem.row
    norm = problem.cover.norm
    reg = problem.regularizer
    lam = reg.lam
    opts = problem.options
    dual = norm.dual(a)

    def phi_parts(c):
        r, j = _farthest(norm, y, c)
        return -float(a @ c) + dual * r + lam * reg.value(r), r, j

    anchor = y.mean(axis=0)

    # lam = 0 (or a constant v) leaves the ball size unpenalized: the value
    # is only approached as the center recedes, so bound the radius and
    # report the cap when it binds.
    capped = lam == 0.0 or reg.kind == "none"
    cap = math.inf
    if capped:
        diam = _diameter(norm, y)
        cap = opts.radius_cap_multiplier * diam
        if diam == 0.0:
            theta = NormBall(norm, y[0].copy(), np.finfo(float).tiny)
            r_hat = approx_robustness(theta, problem.row)
            status = STATUS_RADIUS_CAPPED if dual > 0 else STATUS_OPTIMAL
            return ScenarioSolution(theta, r_hat, r_hat, 0, status)

    box = y.max(axis=0) - y.min(axis=0)
    scale = float(np.sqrt(box @ box))
    if scale == 0.0:
        # all samples coincide; with lam > 0 the optimum shrinks to them
        theta = NormBall(norm, y[0].copy(), np.finfo(float).tiny)
        r_hat = approx_robustness(theta, problem.row)
        return ScenarioSolution(theta, r_hat, r_hat - lam * reg.value(0.0), 0, STATUS_OPTIMAL)

    def run_subgradient(c0):
        # Polyak-style steps toward the running best value plus an
        # exploration margin delta (adaptive level control): a window that
        # fails to gain delta/2 halves delta, and the run stops once both
        # delta and the window gain fall under the relative tolerance.
        # The first step has length `scale` (the sample bounding-box
        # diagonal) and later ones shrink with delta.
        c = np.array(c0, dtype=np.float64)
        best_val, best_r = math.inf, math.inf
        best_c = c.copy()
        checkpoint = math.inf
        delta = None
        small_steps = 0
        iters = 0
        for k in range(1, opts.max_iter + 1):
            iters = k
            val, r, j = phi_parts(c)
            if val < best_val:
                best_val, best_c, best_r = val, c.copy(), r
            g = -a + (dual + lam * reg.derivative(r)) * _dist_subgradient(
                norm, y[j] - c, r
            )
            gn2 = float(g @ g)
            if gn2 < 1e-30:
                break
            if delta is None:
                delta = scale * math.sqrt(gn2)
            step = ((val - best_val) + delta) / gn2
            c = c - step * g
            if capped and _farthest(norm, y, c)[0] > cap:
                c = _cap_projection(norm, y, c, anchor, cap)
            moved = step * math.sqrt(gn2)
            small_steps = small_steps + 1 if moved <= opts.tol_step else 0
            if small_steps >= opts.window:
                break
            if k % opts.window == 0:
                gain = checkpoint - best_val
                tol = opts.tol_obj * max(1.0, abs(best_val))
                if gain <= delta / 2.0:
                    delta *= 0.5
                if delta <= tol and gain <= tol:
                    break
                checkpoint = best_val
        hit_limit = iters >= opts.max_iter
        return best_val, best_c, best_r, iters, hit_limit

    starts = [anchor]
    if capped and dual > 0.0:
        # mean-started iterates cannot reach a faraway cap within the step
        # budget; seed a second run from the best point of the recession
        # ray, located by ternary search (phi is convex along the ray)
        w = _recession_direction(norm, a)
        r0, _ = _farthest(norm, y, anchor)
        lo, hi = 0.0, cap + r0 + 1.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if _farthest(norm, y, anchor + mid * w)[0] <= cap:
                lo = mid
            else:
                hi = mid
        t_lo, t_hi = 0.0, lo
        for _ in range(100):
            m1 = t_lo + (t_hi - t_lo) / 3.0
            m2 = t_hi - (t_hi - t_lo) / 3.0
            if phi_parts(anchor + m1 * w)[0] <= phi_parts(anchor + m2 * w)[0]:
                t_hi = m2
            else:
                t_lo = m1
        starts.append(anchor + 0.5 * (t_lo + t_hi) * w)

    best = None
    total_iters = 0
    hit_limit = False
    for c0 in starts:
        val, c, r, iters, limited = run_subgradient(c0)
        total_iters += iters
        hit_limit = hit_limit or limited
        if best is None or val < best[0]:
            best = (val, c, r)
    best_val, best_c, best_r = best

    if opts.polish:
        penalty_slope = 1e6 * (1.0 + dual + lam * reg.derivative(max(best_r, 1.0)))

        def phi_only(c):
            val, r, _ = phi_parts(c)
            if capped and r > cap:
                return val + penalty_slope * (r - cap)
            return val

        x0 = best_c
        for _ in range(2):  # restart once; fresh simplexes unstick kinks
            res = minimize(
                phi_only,
                x0,
                method="Nelder-Mead",
                options={
                    "xatol": 1e-12 * max(1.0, scale),
                    "fatol": 1e-13 * max(1.0, abs(best_val)),
                    "maxiter": 4000,
                    "maxfev": 8000,
                },
            )
            cand_r, _ = _farthest(norm, y, res.x)
            if res.fun < best_val and (not capped or cand_r <= cap * (1 + 1e-12)):
                best_val, best_c, best_r = float(res.fun), res.x, cand_r
            x0 = res.x

        if norm.kind in ("l2", "q"):
            best_val, best_c, best_r = _smooth_polish(
                norm, y, a, dual, reg, best_c, scale, phi_parts, capped, cap
            )

    # with an unpenalized size and a != 0 the value is only approached as
    # the ball grows, so the returned cover is cap-limited by construction
    status = STATUS_OPTIMAL
    if capped and dual > 0.0:
        status = STATUS_RADIUS_CAPPED
    elif hit_limit:
        status = STATUS_ITERATION_LIMIT

    theta = NormBall(norm, best_c, max(best_r, np.finfo(float).tiny))
    r_hat = approx_robustness(theta, problem.row)
    objective = r_hat - lam * reg.value(theta.radius)
    return ScenarioSolution(theta, r_hat, objective, total_iters, status)


def solve(problem: ScenarioProblem) -> ScenarioSolution:
    """Dispatch to the class solver."""
    if problem.cover.kind == "half_space":
        return solve_half_space(problem)
    return solve_norm_ball(problem)
