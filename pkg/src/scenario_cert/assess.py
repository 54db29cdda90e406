"""End-to-end assessment: size the sample set, draw it, push it through the
model, fit one cover per safe-set row, and report.

The recorded guarantee for each row reads: with probability at least
1 - delta over the drawn samples, the fitted cover contains the random
output with probability at least 1 - eps, and its level r_hat lower-bounds
the (1 - eps)-quantile of the safety-level distribution.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass

import numpy as np

from . import distributions as dists
from .distributions import InputDistribution, sample
from .geometry import (
    NormSpec,
    Regularizer,
    cover_from_dict,
    fit_pca_qnorm,
    load_cover_class,
    normspec_from_dict,
    regularizer_from_dict,
)
from .model import NetworkModel, network_from_dict
from .safeset import SafeSet, safeset_from_dict
from .scenario import (
    CoverClass,
    ScenarioProblem,
    SolverOptions,
    sample_size,
    solve,
)

REPORT_VERSION = 1

VERDICT_CERTIFIED = "certified"
VERDICT_NOT_CERTIFIED = "not_certified"

QFIT_SAME = "same"
QFIT_FRESH_SPLIT = "fresh_split"


@dataclass(frozen=True)
class AssessmentConfig:
    model: NetworkModel
    dist: InputDistribution
    safe: SafeSet
    eps: float
    delta: float
    cover: dict  # normalized cover-class spec, see geometry.load_cover_class
    regularizer: Regularizer = Regularizer()
    seed: int = 0
    n_override: int | None = None
    allow_undersampled: bool = False
    qfit_mode: str = QFIT_SAME
    options: SolverOptions = SolverOptions()

    def __post_init__(self):
        if not (0.0 < self.eps <= 1.0 and 0.0 < self.delta <= 1.0):
            raise ValueError("eps and delta must lie in (0, 1]")
        if self.qfit_mode not in (QFIT_SAME, QFIT_FRESH_SPLIT):
            raise ValueError(f"unknown qfit mode {self.qfit_mode!r}")
        if self.model.output_dim != self.safe.output_dim:
            raise ValueError(
                f"model outputs dim {self.model.output_dim} but the safe set "
                f"expects {self.safe.output_dim}"
            )
        if self.model.input_dim != self.dist.dim:
            raise ValueError(
                f"model takes dim {self.model.input_dim} inputs but the "
                f"distribution has dim {self.dist.dim}"
            )
        object.__setattr__(self, "cover", load_cover_class(self.cover))

    def replace_regularizer(self, reg: Regularizer) -> "AssessmentConfig":
        return AssessmentConfig(
            model=self.model,
            dist=self.dist,
            safe=self.safe,
            eps=self.eps,
            delta=self.delta,
            cover=self.cover,
            regularizer=reg,
            seed=self.seed,
            n_override=self.n_override,
            allow_undersampled=self.allow_undersampled,
            qfit_mode=self.qfit_mode,
            options=self.options,
        )

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "dist": self.dist.to_dict(),
            "safe": self.safe.to_dict(),
            "eps": float(self.eps),
            "delta": float(self.delta),
            "class": self.cover,
            "regularizer": self.regularizer.to_dict(),
            "seed": int(self.seed),
            "n_override": self.n_override,
            "allow_undersampled": bool(self.allow_undersampled),
            "qfit_mode": self.qfit_mode,
            "solver": {
                "max_iter": self.options.max_iter,
                "tol_obj": self.options.tol_obj,
                "tol_step": self.options.tol_step,
                "window": self.options.window,
                "radius_cap_multiplier": self.options.radius_cap_multiplier,
                "polish": self.options.polish,
            },
        }


def config_from_dict(d: dict) -> AssessmentConfig:
    solver = d.get("solver", {})
    return AssessmentConfig(
        model=network_from_dict(d["model"]),
        dist=dists.distribution_from_dict(d["dist"]),
        safe=safeset_from_dict(d["safe"]),
        eps=float(d["eps"]),
        delta=float(d["delta"]),
        cover=d.get("class", {"class": "norm_ball", "norm": "l2"}),
        regularizer=regularizer_from_dict(d.get("regularizer", {"kind": "none"})),
        seed=int(d.get("seed", 0)),
        n_override=d.get("n_override"),
        allow_undersampled=bool(d.get("allow_undersampled", False)),
        qfit_mode=d.get("qfit_mode", QFIT_SAME),
        options=SolverOptions(**solver) if solver else SolverOptions(),
    )


def config_hash(config_dict: dict) -> str:
    blob = json.dumps(config_dict, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class RowResult:
    a: np.ndarray
    b: float
    theta_star: object
    r_hat: float
    objective: float
    status: str
    iterations: int

    def to_dict(self) -> dict:
        return {
            "a": np.asarray(self.a).tolist(),
            "b": float(self.b),
            "theta_star": self.theta_star.to_dict(),
            "r_hat": float(self.r_hat),
            "objective": float(self.objective),
            "status": self.status,
            "iterations": int(self.iterations),
        }


@dataclass
class AssessmentReport:
    config: dict
    rows: list
    verdict: str
    n_samples: int
    n_params: int
    seed: int
    eps: float
    delta: float
    lam: float
    wall_time_s: float
    provenance: dict
    validation: list | None = None

    def to_dict(self) -> dict:
        out = {
            "version": REPORT_VERSION,
            "config": self.config,
            "rows": [r.to_dict() for r in self.rows],
            "verdict": self.verdict,
            "N": int(self.n_samples),
            "p": int(self.n_params),
            "seed": int(self.seed),
            "eps": float(self.eps),
            "delta": float(self.delta),
            "lambda": float(self.lam),
            "wall_time_s": float(self.wall_time_s),
            "provenance": self.provenance,
        }
        if self.validation is not None:
            out["validation"] = self.validation
        return out

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")


def report_from_dict(d: dict) -> AssessmentReport:
    if d.get("version") != REPORT_VERSION:
        raise ValueError(f"unsupported report version {d.get('version')!r}")
    rows = [
        RowResult(
            a=np.asarray(r["a"], dtype=np.float64),
            b=float(r["b"]),
            theta_star=cover_from_dict(r["theta_star"]),
            r_hat=float(r["r_hat"]),
            objective=float(r.get("objective", r["r_hat"])),
            status=r["status"],
            iterations=int(r.get("iterations", 0)),
        )
        for r in d["rows"]
    ]
    return AssessmentReport(
        config=d["config"],
        rows=rows,
        verdict=d["verdict"],
        n_samples=int(d["N"]),
        n_params=int(d["p"]),
        seed=int(d["seed"]),
        eps=float(d["eps"]),
        delta=float(d["delta"]),
        lam=float(d["lambda"]),
        wall_time_s=float(d.get("wall_time_s", 0.0)),
        provenance=d.get("provenance", {}),
        validation=d.get("validation"),
    )


def load_report(path) -> AssessmentReport:
    with open(path) as fh:
        return report_from_dict(json.load(fh))


def _samples_hash(x: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(x).tobytes()).hexdigest()[:16]


def _effective_n(cfg: AssessmentConfig, p: int) -> tuple[int, int, bool]:
    bound = sample_size(cfg.eps, cfg.delta, p)
    if cfg.n_override is None:
        return bound, bound, False
    n = int(cfg.n_override)
    if n < bound and not cfg.allow_undersampled:
        raise ValueError(
            f"N={n} is below the required sample size {bound}; pass "
            "allow_undersampled to proceed without the coverage guarantee"
        )
    return n, bound, n < bound


def _n_params(cfg: AssessmentConfig) -> int:
    return 1 if cfg.cover["class"] == "half_space" else cfg.model.output_dim + 1


def _resolve_cover(cfg: AssessmentConfig, y_fit: np.ndarray) -> CoverClass:
    spec = cfg.cover
    if spec["class"] == "half_space":
        return CoverClass("half_space")
    norm = spec["norm"]
    if isinstance(norm, dict):
        return CoverClass("norm_ball", normspec_from_dict(norm))
    if norm == "q_pca":
        return CoverClass("norm_ball", fit_pca_qnorm(y_fit))
    return CoverClass("norm_ball", NormSpec(norm))


def _draw_scenario_data(cfg: AssessmentConfig, n: int):
    """Inputs/outputs for the constraints, plus the covariance-fitting
    outputs. Same mode reuses the scenario outputs; fresh-split mode fits
    on a disjoint stream so the constraint count keeps its guarantee."""
    x = sample(cfg.dist, n, cfg.seed, stream=dists.STREAM_SAMPLING)
    y = cfg.model.evaluate(x)
    if cfg.qfit_mode == QFIT_FRESH_SPLIT and cfg.cover.get("norm") == "q_pca":
        x_fit = sample(cfg.dist, n, cfg.seed, stream=dists.STREAM_QFIT)
        y_fit = cfg.model.evaluate(x_fit)
    else:
        y_fit = y
    return x, y, y_fit


def _solve_rows(cfg: AssessmentConfig, y: np.ndarray, cover: CoverClass) -> list:
    rows = []
    for row in cfg.safe.rows():
        sol = solve(
            ScenarioProblem(
                outputs=y,
                row=row,
                cover=cover,
                regularizer=cfg.regularizer,
                options=cfg.options,
            )
        )
        rows.append(
            RowResult(
                a=row.a,
                b=row.b,
                theta_star=sol.theta_star,
                r_hat=sol.r_hat,
                objective=sol.objective,
                status=sol.status,
                iterations=sol.iterations,
            )
        )
    return rows


def _build_report(cfg, rows, n, bound, undersampled, shared_hash, t0):
    worst = min(range(len(rows)), key=lambda i: rows[i].r_hat)
    verdict = (
        VERDICT_CERTIFIED
        if all(r.r_hat >= 0.0 for r in rows)
        else VERDICT_NOT_CERTIFIED
    )
    config_dict = cfg.to_dict()
    return AssessmentReport(
        config=config_dict,
        rows=rows,
        verdict=verdict,
        n_samples=n,
        n_params=_n_params(cfg),
        seed=cfg.seed,
        eps=cfg.eps,
        delta=cfg.delta,
        lam=cfg.regularizer.lam,
        wall_time_s=time.perf_counter() - t0,
        provenance={
            "config_hash": config_hash(config_dict),
            "samples_hash": shared_hash,
            "sample_size_bound": bound,
            "undersampled": undersampled,
            "guarantee": (
                "none (undersampled)"
                if undersampled
                else "eps-cover and quantile bound hold with probability >= "
                f"{1.0 - cfg.delta}"
            ),
            "qfit_mode": cfg.qfit_mode,
            "worst_row": worst,
            "sample_files": [],
        },
    )


def assess(cfg: AssessmentConfig, keep_samples: bool = False) -> AssessmentReport:
    """Run the full pipeline and produce a self-contained report.

    With ``keep_samples`` the drawn inputs/outputs are attached to the
    report object (not serialized) for CSV export.
    """
    t0 = time.perf_counter()
    n, bound, undersampled = _effective_n(cfg, _n_params(cfg))
    x, y, y_fit = _draw_scenario_data(cfg, n)
    cover = _resolve_cover(cfg, y_fit)
    rows = _solve_rows(cfg, y, cover)
    report = _build_report(cfg, rows, n, bound, undersampled, _samples_hash(x), t0)
    if keep_samples:
        report.samples = (x, y)  # type: ignore[attr-defined]
    return report


def sweep_lambda(cfg: AssessmentConfig, lambdas) -> list[AssessmentReport]:
    """Assess once per regularization weight, reusing one sample draw (and
    one fitted ellipse shape, when applicable) across the whole sweep."""
    lams = [float(v) for v in lambdas]
    if any(v < 0 for v in lams):
        raise ValueError("lambda values must be >= 0")
    if sorted(lams) != lams:
        raise ValueError("lambda values must be sorted ascending")

    n, bound, undersampled = _effective_n(cfg, _n_params(cfg))
    x, y, y_fit = _draw_scenario_data(cfg, n)
    cover = _resolve_cover(cfg, y_fit)
    shared_hash = _samples_hash(x)

    reports = []
    for lam in lams:
        cfg_lam = cfg.replace_regularizer(Regularizer(kind=cfg.regularizer.kind, lam=lam))
        t0 = time.perf_counter()
        rows = _solve_rows(cfg_lam, y, cover)
        report = _build_report(cfg_lam, rows, n, bound, undersampled, shared_hash, t0)
        report.samples = (x, y)  # type: ignore[attr-defined]
        reports.append(report)
    return reports
