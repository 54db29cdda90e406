import json

import numpy as np
import pytest

from scenario_cert_figures import boundary_points, plot_cover, plot_sweep, read_samples
from scenario_cert_figures.cli import main

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def is_png(path):
    return path.exists() and path.read_bytes()[:8] == PNG_MAGIC


class TestPlotCover:
    def test_certified_report(self, bundle_dir, tmp_path):
        out = plot_cover(bundle_dir / "certified.json", bundle_dir / "samples.csv", tmp_path / "c.png")
        assert is_png(out)

    def test_min_ball_report(self, bundle_dir, tmp_path):
        out = plot_cover(
            bundle_dir / "minball.json", bundle_dir / "samples_minball.csv", tmp_path / "m.png"
        )
        assert is_png(out)

    def test_min_ball_boundary_crosses_safe_line(self, bundle_dir):
        report = json.loads((bundle_dir / "minball.json").read_text())
        row = report["rows"][0]
        pts = boundary_points(row["theta_star"])
        levels = pts @ np.asarray(row["a"]) + row["b"]
        assert levels.min() < 0 < levels.max()

    def test_certified_boundary_stays_safe(self, bundle_dir):
        report = json.loads((bundle_dir / "certified.json").read_text())
        row = report["rows"][0]
        pts = boundary_points(row["theta_star"])
        levels = pts @ np.asarray(row["a"]) + row["b"]
        assert levels.min() > 0

    def test_half_space_report_renders_line(self, bundle_dir, tmp_path):
        out = plot_cover(
            bundle_dir / "halfspace.json", bundle_dir / "samples_hs.csv", tmp_path / "h.png"
        )
        assert is_png(out)

    def test_empty_samples_rejected_before_writing(self, bundle_dir, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("x0,x1,y0,y1,s0\n")
        out = tmp_path / "never.png"
        with pytest.raises(ValueError, match="no rows"):
            plot_cover(bundle_dir / "certified.json", empty, out)
        assert not out.exists()

    def test_non_2d_outputs_rejected(self, bundle_dir, tmp_path):
        csv = tmp_path / "three.csv"
        csv.write_text("x0,y0,y1,y2,s0\n0,1,2,3,4\n1,2,3,4,5\n")
        with pytest.raises(ValueError, match="2-D"):
            plot_cover(bundle_dir / "certified.json", csv, tmp_path / "никогда.png")

    def test_rerender_is_byte_stable(self, bundle_dir, tmp_path):
        a = plot_cover(bundle_dir / "certified.json", bundle_dir / "samples.csv", tmp_path / "a.png")
        b = plot_cover(bundle_dir / "certified.json", bundle_dir / "samples.csv", tmp_path / "b.png")
        assert a.read_bytes() == b.read_bytes()

    def test_inputs_not_mutated(self, bundle_dir, tmp_path):
        before = (bundle_dir / "certified.json").read_bytes()
        plot_cover(bundle_dir / "certified.json", bundle_dir / "samples.csv", tmp_path / "x.png")
        assert (bundle_dir / "certified.json").read_bytes() == before


class TestPlotSweep:
    def test_three_weight_bundle(self, bundle_dir, tmp_path):
        out = plot_sweep(bundle_dir / "sweep" / "bundle.json", tmp_path / "sweep.png")
        assert is_png(out)

    def test_radii_shrink_across_bundle(self, bundle_dir):
        bundle = json.loads((bundle_dir / "sweep" / "bundle.json").read_text())
        radii = []
        for name in bundle["reports"]:
            rep = json.loads((bundle_dir / "sweep" / name).read_text())
            radii.append(rep["rows"][0]["theta_star"]["radius"])
        assert radii[0] >= radii[1] >= radii[2]

    def test_single_report_falls_back_to_cover(self, bundle_dir, tmp_path):
        bundle = json.loads((bundle_dir / "sweep" / "bundle.json").read_text())
        single = {
            "version": 1,
            "lambdas": bundle["lambdas"][:1],
            "reports": bundle["reports"][:1],
            "samples": bundle["samples"],
        }
        path = bundle_dir / "sweep" / "single.json"
        path.write_text(json.dumps(single))
        out = plot_sweep(path, tmp_path / "single.png")
        assert is_png(out)

    def test_mismatched_sample_provenance_rejected(self, bundle_dir, tmp_path):
        bundle = json.loads((bundle_dir / "sweep" / "bundle.json").read_text())
        name = bundle["reports"][0]
        rep = json.loads((bundle_dir / "sweep" / name).read_text())
        rep["provenance"]["samples_hash"] = "deadbeefdeadbeef"
        (bundle_dir / "sweep" / "tampered.json").write_text(json.dumps(rep))
        bad = dict(bundle, reports=["tampered.json"] + bundle["reports"][1:])
        path = bundle_dir / "sweep" / "bad_bundle.json"
        path.write_text(json.dumps(bad))
        with pytest.raises(ValueError, match="share one sample set"):
            plot_sweep(path, tmp_path / "никогда.png")


class TestCli:
    def test_cover_mode(self, bundle_dir, tmp_path, capsys):
        out = tmp_path / "via_cli.png"
        code = main(
            [
                "--report", str(bundle_dir / "certified.json"),
                "--samples", str(bundle_dir / "samples.csv"),
                "--out", str(out),
            ]
        )
        assert code == 0
        assert capsys.readouterr().out.strip().endswith("via_cli.png")
        assert is_png(out)

    def test_bundle_mode(self, bundle_dir, tmp_path):
        out = tmp_path / "sweep_cli.png"
        assert main(["--bundle", str(bundle_dir / "sweep" / "bundle.json"), "--out", str(out)]) == 0
        assert is_png(out)

    def test_missing_inputs_usage_error(self, tmp_path):
        assert main(["--out", str(tmp_path / "x.png")]) == 2

    def test_bad_report_error(self, bundle_dir, tmp_path):
        missing = bundle_dir / "nope.json"
        code = main(
            [
                "--report", str(missing),
                "--samples", str(bundle_dir / "samples.csv"),
                "--out", str(tmp_path / "x.png"),
            ]
        )
        assert code == 2


def test_acceptance_figure_generation(bundle_dir, tmp_path):
    """Secondary acceptance: covers render for the certified, min-ball, and
    sweep bundles; the min-ball boundary crosses the safe line."""
    ok = True
    for name, args in (
        ("certified cover", ("certified.json", "samples.csv")),
        ("min-ball cover", ("minball.json", "samples_minball.csv")),
    ):
        out = tmp_path / f"{name.split()[0]}.png"
        plot_cover(bundle_dir / args[0], bundle_dir / args[1], out)
        ok = ok and is_png(out)
    sweep_out = tmp_path / "sweep.png"
    plot_sweep(bundle_dir / "sweep" / "bundle.json", sweep_out)
    ok = ok and is_png(sweep_out)

    report = json.loads((bundle_dir / "minball.json").read_text())
    row = report["rows"][0]
    pts = boundary_points(row["theta_star"])
    levels = pts @ np.asarray(row["a"]) + row["b"]
    crosses = levels.min() < 0 < levels.max()
    line = f"{'PASS' if ok and crosses else 'FAIL'}: figure generation (cover/min-ball/sweep, crossing boundary)"
    print(line, flush=True)
    assert ok and crosses, line
