"""Command-line front end.

Subcommands: sample-size, assess, sweep, validate, export-samples. Exit
codes are stable for CI gating: 0 certified / validation passed, 1 not
certified / validation failed, 2 usage or input error. The final stdout
line of assess/sweep/validate/export-samples is the written file path.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import validate as validate_mod
from .assess import (
    QFIT_SAME,
    REPORT_VERSION,
    VERDICT_CERTIFIED,
    AssessmentConfig,
    config_from_dict,
    load_report,
    sweep_lambda,
)
from .assess import assess as run_assessment
from .distributions import distribution_from_dict, load_distribution, sample
from .geometry import load_cover_class, regularizer_from_dict, Regularizer
from .model import load_model, network_from_dict
from .safeset import load_safeset, safeset_from_dict, safety_level, Row
from .scenario import SolverOptions, sample_size

ENV_SEED = "SCENARIO_CERT_SEED"

_CLASS_SHORTHAND = {
    "l1": {"class": "norm_ball", "norm": "l1"},
    "l2": {"class": "norm_ball", "norm": "l2"},
    "linf": {"class": "norm_ball", "norm": "linf"},
    "q_pca": {"class": "norm_ball", "norm": "q_pca"},
    "half_space": {"class": "half_space"},
}


def _load_json_arg(value: str) -> dict:
    """Accept inline JSON or a path to a JSON file."""
    text = value.strip()
    if text.startswith("{"):
        return json.loads(text)
    with open(value) as fh:
        return json.load(fh)


def _ref(value, loader_path, loader_dict):
    if isinstance(value, str):
        return loader_path(value)
    return loader_dict(value)


def _resolve_seed(args, file_cfg: dict) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get(ENV_SEED)
    if env is not None:
        return int(env)
    if "seed" in file_cfg:
        return int(file_cfg["seed"])
    return 0


def _build_config(args) -> AssessmentConfig:
    file_cfg = {}
    if args.config:
        with open(args.config) as fh:
            file_cfg = json.load(fh)

    def pick(flag, key, default=None):
        return flag if flag is not None else file_cfg.get(key, default)

    model_ref = pick(args.model, "model")
    dist_ref = pick(args.dist, "dist")
    safe_ref = pick(args.safe, "safe")
    if model_ref is None or dist_ref is None or safe_ref is None:
        raise ValueError("a model, a distribution, and a safe set are required")

    cover = pick(args.cover_class, "class", {"class": "norm_ball", "norm": "l2"})
    if isinstance(cover, str):
        cover = _CLASS_SHORTHAND.get(cover) or _load_json_arg(cover)

    reg_spec = pick(args.regularizer, "regularizer", {"kind": "radius_squared", "lambda": 0.0})
    if isinstance(reg_spec, str):
        reg_spec = _load_json_arg(reg_spec)
    reg = regularizer_from_dict(reg_spec)
    if args.lam is not None:
        reg = Regularizer(kind=reg.kind, lam=args.lam)

    solver_cfg = dict(file_cfg.get("solver", {}))
    if args.max_iter is not None:
        solver_cfg["max_iter"] = args.max_iter
    if args.tol is not None:
        solver_cfg["tol_obj"] = args.tol
    if args.radius_cap_multiplier is not None:
        solver_cfg["radius_cap_multiplier"] = args.radius_cap_multiplier

    return AssessmentConfig(
        model=_ref(model_ref, load_model, network_from_dict),
        dist=_ref(dist_ref, load_distribution, distribution_from_dict),
        safe=_ref(safe_ref, load_safeset, safeset_from_dict),
        eps=pick(args.eps, "eps", 0.1),
        delta=pick(args.delta, "delta", 1e-5),
        cover=cover,
        regularizer=reg,
        seed=_resolve_seed(args, file_cfg),
        n_override=pick(args.n_override, "n_override"),
        allow_undersampled=bool(
            args.allow_undersampled or file_cfg.get("allow_undersampled", False)
        ),
        qfit_mode=pick(args.qfit_mode, "qfit_mode", QFIT_SAME),
        options=SolverOptions(**solver_cfg) if solver_cfg else SolverOptions(),
    )


def write_samples_csv(path, x: np.ndarray, y: np.ndarray, safe) -> None:
    """One row per sample: inputs, outputs, then per-row safety levels."""
    rows = safe.rows()
    header = (
        [f"x{i}" for i in range(x.shape[1])]
        + [f"y{i}" for i in range(y.shape[1])]
        + [f"s{i}" for i in range(len(rows))]
    )
    levels = np.column_stack([safety_level(r, y) for r in rows])
    data = np.column_stack([x, y, levels])
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for r in data:
            fh.write(",".join(f"{v:.17g}" for v in r) + "\n")


def _add_assess_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON bundling model/dist/safe/class/regularizer")
    p.add_argument("--model", help="network JSON path")
    p.add_argument("--dist", help="distribution JSON path")
    p.add_argument("--safe", help="safe-set JSON path")
    p.add_argument(
        "--class",
        dest="cover_class",
        help="cover class: l1|l2|linf|q_pca|half_space, inline JSON, or a path",
    )
    p.add_argument("--regularizer", help="regularizer spec, inline JSON or a path")
    p.add_argument("--lambda", dest="lam", type=float, help="regularizer weight")
    p.add_argument("--eps", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--n-override", type=int)
    p.add_argument("--allow-undersampled", action="store_true")
    p.add_argument("--qfit-mode", choices=["same", "fresh_split"])
    p.add_argument("--max-iter", type=int)
    p.add_argument("--tol", type=float, help="solver objective tolerance")
    p.add_argument("--radius-cap-multiplier", type=float)


def cmd_sample_size(args) -> int:
    print(sample_size(args.eps, args.delta, args.p))
    return 0


def cmd_assess(args) -> int:
    cfg = _build_config(args)
    report = run_assessment(cfg, keep_samples=True)
    out = Path(args.out)
    if args.export_samples:
        x, y = report.samples
        write_samples_csv(args.export_samples, x, y, cfg.safe)
        report.provenance["sample_files"] = [str(args.export_samples)]
    report.save(out)
    print(f"verdict: {report.verdict} (worst r_hat = "
          f"{min(r.r_hat for r in report.rows):.6g}, N = {report.n_samples})")
    print(out)
    return 0 if report.verdict == VERDICT_CERTIFIED else 1


def cmd_sweep(args) -> int:
    cfg = _build_config(args)
    lams = [float(t) for t in args.lambdas.split(",") if t.strip() != ""]
    uniq = sorted(set(lams))
    if len(uniq) != len(lams):
        warnings.warn("duplicate lambda values were deduplicated")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    reports = sweep_lambda(cfg, uniq)

    x, y = reports[0].samples
    samples_path = out_dir / "samples.csv"
    write_samples_csv(samples_path, x, y, cfg.safe)

    paths = []
    for lam, report in zip(uniq, reports):
        report.provenance["sample_files"] = [samples_path.name]
        path = out_dir / f"report_lambda_{lam:g}.json"
        report.save(path)
        paths.append(path.name)
        print(f"lambda={lam:g}: verdict={report.verdict}, worst r_hat="
              f"{min(r.r_hat for r in report.rows):.6g}")
    bundle = {
        "version": REPORT_VERSION,
        "lambdas": uniq,
        "reports": paths,
        "samples": samples_path.name,
    }
    bundle_path = out_dir / "bundle.json"
    with open(bundle_path, "w") as fh:
        json.dump(bundle, fh, indent=2)
        fh.write("\n")
    print(bundle_path)
    return (
        0
        if all(r.verdict == VERDICT_CERTIFIED for r in reports)
        else 1
    )


def cmd_validate(args) -> int:
    report = load_report(args.report)
    eps = report.eps
    n_val = int(args.samples)
    if n_val < 100.0 / eps:
        raise ValueError(
            f"M={n_val} is too small for eps={eps}; need at least "
            f"{int(np.ceil(100.0 / eps))} validation samples"
        )
    cfg = config_from_dict(report.config)
    seed = args.seed if args.seed is not None else report.seed

    blocks = []
    all_covered = True
    for i, row_res in enumerate(report.rows):
        row = Row(row_res.a, row_res.b)
        cov = validate_mod.estimate_coverage(
            cfg.model, cfg.dist, row_res.theta_star, row, n_val, seed
        )
        prl = validate_mod.estimate_prl(cfg.model, cfg.dist, row, eps, n_val, seed)
        min_s = validate_mod.empirical_min_safety(cfg.model, cfg.dist, row, n_val, seed)
        blocks.append(
            {
                "row": i,
                "coverage": cov.to_dict(),
                "prl_estimate": prl,
                "min_safety": min_s,
                "seed": seed,
            }
        )
        all_covered = all_covered and cov.p_hat >= 1.0 - eps
    report.validation = blocks
    out = Path(args.out) if args.out else Path(args.report)
    report.save(out)
    print(f"coverage {'ok' if all_covered else 'below 1-eps'} on {len(blocks)} row(s)")
    print(out)
    return 0 if all_covered else 1


def cmd_export_samples(args) -> int:
    report = load_report(args.report)
    cfg = config_from_dict(report.config)
    x = sample(cfg.dist, report.n_samples, cfg.seed)
    y = cfg.model.evaluate(x)
    write_samples_csv(args.out, x, y, cfg.safe)
    print(args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scenario-cert",
        description="Certify and localize black-box network outputs under "
        "random inputs via sampled cover fitting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample-size", help="print the required sample count")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--p", type=int, required=True)
    p.set_defaults(func=cmd_sample_size)

    p = sub.add_parser("assess", help="run an assessment and write the report")
    _add_assess_flags(p)
    p.add_argument("--out", default="report.json")
    p.add_argument("--export-samples", help="also write the samples CSV here")
    p.set_defaults(func=cmd_assess)

    p = sub.add_parser("sweep", help="assess across regularization weights")
    _add_assess_flags(p)
    p.add_argument("--lambdas", required=True, help="comma-separated weights")
    p.add_argument("--out-dir", default="sweep")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="append fresh-sample checks to a report")
    p.add_argument("--report", required=True)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="write the augmented report here instead")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("export-samples", help="regenerate a report's samples CSV")
    p.add_argument("--report", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_samples)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
