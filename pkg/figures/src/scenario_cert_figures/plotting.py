"""Render assessment reports: output scatter, fitted cover boundary, and
the safe-set line with its unsafe side shaded.

This package reads only the documented report JSON and samples CSV schemas;
it does not import the assessment library.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

REPORT_VERSION = 1
_BOUNDARY_POINTS = 720


def read_report(path) -> dict:
    with open(path) as fh:
        report = json.load(fh)
    if report.get("version") != REPORT_VERSION:
        raise ValueError(f"unsupported report version {report.get('version')!r}")
    if not report.get("rows"):
        raise ValueError("report has no assessed rows")
    return report


def read_samples(path) -> dict:
    """Columns from a samples CSV keyed by x/y/s prefix."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        body = fh.read().strip()
    if not body:
        raise ValueError(f"samples file {path} holds no rows")
    data = np.loadtxt(body.splitlines(), delimiter=",", ndmin=2)
    cols = {name: data[:, i] for i, name in enumerate(header)}
    out = {}
    for prefix in ("x", "y", "s"):
        names = sorted(
            (n for n in cols if n.startswith(prefix) and n[1:].isdigit()),
            key=lambda n: int(n[1:]),
        )
        out[prefix] = np.column_stack([cols[n] for n in names]) if names else None
    if out["y"] is None:
        raise ValueError("samples file lacks output columns y0, y1, ...")
    return out


def _norm_rows(norm_spec: dict, z: np.ndarray) -> np.ndarray:
    kind = norm_spec["kind"]
    if kind == "l1":
        return np.abs(z).sum(axis=1)
    if kind == "l2":
        return np.sqrt((z * z).sum(axis=1))
    if kind == "linf":
        return np.abs(z).max(axis=1)
    if kind == "q":
        q = np.asarray(norm_spec["Q"], dtype=float)
        return np.sqrt(np.maximum(((z @ q) * z).sum(axis=1), 0.0))
    raise ValueError(f"unknown norm kind {kind!r}")


def boundary_points(theta: dict, n: int = _BOUNDARY_POINTS) -> np.ndarray | None:
    """Closed boundary polyline of a 2-D norm-ball cover; None for a
    half-space (rendered as a line instead)."""
    if theta["class"] == "half_space":
        return None
    center = np.asarray(theta["center"], dtype=float)
    if center.shape != (2,):
        raise ValueError("cover boundaries are drawn for 2-D outputs only")
    radius = float(theta["radius"])
    phi = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    w = np.column_stack([np.cos(phi), np.sin(phi)])
    u = w / _norm_rows(theta["norm"], w)[:, None]
    pts = center + radius * u
    err = np.abs(_norm_rows(theta["norm"], pts - center) - radius)
    assert err.max() <= max(1e-9 * radius, 1e-12), "boundary drifted off the cover"
    return np.vstack([pts, pts[:1]])


def _clip_halfplane(box: np.ndarray, a: np.ndarray, b: float) -> np.ndarray | None:
    """Polygon of {a.y + b <= 0} within the axes box (one-plane clip)."""
    out = []
    n = len(box)
    for i in range(n):
        p, q = box[i], box[(i + 1) % n]
        fp, fq = a @ p + b, a @ q + b
        if fp <= 0:
            out.append(p)
        if (fp <= 0) != (fq <= 0):
            t = fp / (fp - fq)
            out.append(p + t * (q - p))
    return np.array(out) if len(out) >= 3 else None


def _draw_row(ax, row: dict, xlim, ylim, label=True):
    a = np.asarray(row["a"], dtype=float)
    b = float(row["b"])
    (x0, x1), (y0, y1) = xlim, ylim
    box = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    unsafe = _clip_halfplane(box, a, b)
    if unsafe is not None:
        ax.fill(unsafe[:, 0], unsafe[:, 1], color="0.85", zorder=0,
                label="unsafe side" if label else None)
    # the line a.y + b = 0 across the box
    if abs(a[1]) >= abs(a[0]):
        xs = np.array([x0, x1])
        ys = -(b + a[0] * xs) / a[1]
    else:
        ys = np.array([y0, y1])
        xs = -(b + a[1] * ys) / a[0]
    ax.plot(xs, ys, "k-", lw=1.2, label="safe boundary" if label else None)


def _limits(y: np.ndarray, boundaries) -> tuple:
    pts = [y] + [p for p in boundaries if p is not None]
    allp = np.vstack(pts)
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    pad = 0.08 * np.maximum(hi - lo, 1e-6)
    lo, hi = lo - pad, hi + pad
    return (lo[0], hi[0]), (lo[1], hi[1])


def _row_color(row: dict) -> str:
    return "tab:blue" if row["r_hat"] >= 0 else "tab:red"


def plot_cover(report_path, samples_path, out_path, row_index: int = 0) -> Path:
    """Scatter the sampled outputs, draw the fitted cover and the safe-set
    line, and write the image. 2-D outputs only."""
    report = read_report(report_path)
    samples = read_samples(samples_path)
    y = samples["y"]
    if y.shape[1] != 2:
        raise ValueError(
            f"plotting needs 2-D outputs, the samples have {y.shape[1]} "
            "output columns"
        )
    row = report["rows"][row_index]
    theta = row["theta_star"]
    boundary = boundary_points(theta)

    fig, ax = plt.subplots(figsize=(6.4, 5.6))
    xlim, ylim = _limits(y, [boundary])
    _draw_row(ax, row, xlim, ylim)
    ax.scatter(y[:, 0], y[:, 1], s=6, c="0.3", alpha=0.6, label=f"outputs (N={len(y)})")
    label = f"cover, level={row['r_hat']:.4g}"
    if boundary is not None:
        ax.plot(boundary[:, 0], boundary[:, 1], color=_row_color(row), lw=1.8, label=label)
    else:
        # half-space cover: its boundary is the shifted safe line
        a = np.asarray(row["a"], dtype=float)
        shifted = dict(row, b=float(row["b"]) - float(theta["offset"]))
        _draw_row(ax, shifted, xlim, ylim, label=False)
        ax.plot([], [], color=_row_color(row), lw=1.8, label=label)
    ax.set_xlim(*xlim)
    ax.set_ylim(*ylim)
    ax.set_xlabel("y0")
    ax.set_ylabel("y1")
    ax.set_title(f"{report['verdict']} (eps={report['eps']}, N={report['N']})")
    ax.legend(loc="best", fontsize=8)
    out = Path(out_path)
    fig.savefig(out, dpi=130)
    plt.close(fig)
    return out


def read_bundle(path) -> dict:
    base = Path(path).parent
    with open(path) as fh:
        bundle = json.load(fh)
    if "reports" not in bundle or "samples" not in bundle:
        raise ValueError("bundle JSON needs 'reports' and 'samples' entries")
    reports = [read_report(base / name) for name in bundle["reports"]]
    hashes = {r.get("provenance", {}).get("samples_hash") for r in reports}
    if len(hashes) != 1:
        raise ValueError("bundle reports do not share one sample set")
    return {
        "reports": reports,
        "samples": read_samples(base / bundle["samples"]),
        "lambdas": bundle.get("lambdas"),
    }


def plot_sweep(bundle_path, out_path, row_index: int = 0) -> Path:
    """Overlay the covers of a regularization sweep, one boundary per
    report, with a zoom panel on the tightest one."""
    bundle = read_bundle(bundle_path)
    reports = bundle["reports"]
    if len(reports) == 1:
        # degenerate sweep: same picture as a single-report plot
        base = Path(bundle_path).parent
        with open(bundle_path) as fh:
            raw = json.load(fh)
        return plot_cover(base / raw["reports"][0], base / raw["samples"], out_path)

    y = bundle["samples"]["y"]
    if y.shape[1] != 2:
        raise ValueError("plotting needs 2-D outputs")

    rows = [r["rows"][row_index] for r in reports]
    boundaries = [boundary_points(row["theta_star"]) for row in rows]
    colors = plt.cm.viridis(np.linspace(0.1, 0.85, len(rows)))

    fig, (ax, ax_zoom) = plt.subplots(1, 2, figsize=(11.5, 5.4))
    xlim, ylim = _limits(y, boundaries)
    _draw_row(ax, rows[0], xlim, ylim)
    ax.scatter(y[:, 0], y[:, 1], s=5, c="0.3", alpha=0.5, label=f"outputs (N={len(y)})")
    for rep, row, boundary, color in zip(reports, rows, boundaries, colors):
        lab = f"lambda={rep['lambda']:g}, level={row['r_hat']:.4g}"
        if boundary is None:
            a = np.asarray(row["a"], dtype=float)
            shifted = dict(row, b=float(row["b"]) - float(row["theta_star"]["offset"]))
            _draw_row(ax, shifted, xlim, ylim, label=False)
            ax.plot([], [], color=color, lw=1.6, label=lab)
        else:
            ax.plot(boundary[:, 0], boundary[:, 1], color=color, lw=1.6, label=lab)
    ax.set_xlim(*xlim)
    ax.set_ylim(*ylim)
    ax.set_xlabel("y0")
    ax.set_ylabel("y1")
    ax.set_title("covers across regularization weights")
    ax.legend(loc="best", fontsize=7)

    # zoom on the data plus the tightest drawn cover
    drawn = [b for b in boundaries if b is not None]
    zoom_pts = np.vstack(
        [y] + ([min(drawn, key=lambda b: float(np.ptp(b[:, 0])))] if drawn else [])
    )
    lo, hi = zoom_pts.min(axis=0), zoom_pts.max(axis=0)
    pad = 0.1 * np.maximum(hi - lo, 1e-6)
    zx, zy = (lo[0] - pad[0], hi[0] + pad[0]), (lo[1] - pad[1], hi[1] + pad[1])
    _draw_row(ax_zoom, rows[0], zx, zy, label=False)
    ax_zoom.scatter(y[:, 0], y[:, 1], s=5, c="0.3", alpha=0.5)
    for row, boundary, color in zip(rows, boundaries, colors):
        if boundary is not None:
            ax_zoom.plot(boundary[:, 0], boundary[:, 1], color=color, lw=1.6)
    ax_zoom.set_xlim(*zx)
    ax_zoom.set_ylim(*zy)
    ax_zoom.set_title("close-up")

    out = Path(out_path)
    fig.savefig(out, dpi=130)
    plt.close(fig)
    return out
