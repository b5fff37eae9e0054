"""Figure rendering checks.

The reference CSVs come from the solver package's own command line, so these
tests double as an integration check of the CSV contract between the two
packages.  The solver runs used here are the cheapest configurations that
still produce meaningful curves.
"""

import math
import subprocess
import sys

import numpy as np
import pytest

from tentdgplot import (plot_convergence, plot_energy, plot_measurement,
                        plot_snapshot)
from tentdgplot.convergence import main as conv_main


def solver_csv(tmp_path, name, *args):
    out = tmp_path / name
    cmd = [sys.executable, "-m", "tentdg", *args, "--out", str(out)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return out


def svg_text(path):
    return path.read_text()


@pytest.fixture(scope="module")
def conv_csv(tmp_path_factory):
    return solver_csv(tmp_path_factory.mktemp("conv"), "conv.csv",
                      "convergence", "--p", "1,2", "--h", "0.25,0.125,0.0625",
                      "--T", "0.5")


class TestConvergence:
    def test_exact_dyadic_slope(self, tmp_path):
        f = tmp_path / "two.csv"
        f.write_text("h,p,dofs,error,rate,seconds\n"
                     "1.0,1,4,1.0,nan,0.0\n"
                     "0.5,1,8,0.25,2.0,0.0\n")
        res = plot_convergence(f, tmp_path / "two.svg")
        assert abs(res.slopes[(None, 1)] - 2.0) <= 1e-12
        assert "slope 2.00" in svg_text(tmp_path / "two.svg")

    def test_single_series_single_legend_entry(self, tmp_path):
        f = tmp_path / "one.csv"
        f.write_text("h,p,dofs,error,rate,seconds\n"
                     "1.0,2,4,1.0,nan,0.0\n"
                     "0.5,2,8,0.125,3.0,0.0\n")
        res = plot_convergence(f, tmp_path / "one.svg")
        assert res.labels == ("p=2",)

    def test_slopes_match_same_regression_on_solver_data(self, conv_csv,
                                                         tmp_path):
        res = plot_convergence(conv_csv, tmp_path / "c.svg")
        rows = [line.split(",") for line
                in conv_csv.read_text().strip().splitlines()[1:]]
        for (label, p), slope in res.slopes.items():
            pts = [(float(r[0]), float(r[3])) for r in rows
                   if int(r[1]) == p]
            lx = np.log([h for h, _ in pts])
            le = np.log([e for _, e in pts])
            want = np.polyfit(lx, le, 1)[0]
            assert abs(slope - want) <= 0.01, (p, slope, want)
            # the annotation in the file carries the same number
            assert f"slope {slope:.2f}" in svg_text(tmp_path / "c.svg")
        # solver-side pairwise rates and the fitted slope describe the same
        # decay, so they should roughly agree on smooth data
        for (label, p), slope in res.slopes.items():
            rates = [float(r[4]) for r in rows
                     if int(r[1]) == p and r[4] != "nan"]
            assert abs(slope - np.mean(rates)) <= 0.5

    def test_dof_axis_for_mesh_comparison(self, tmp_path):
        f = tmp_path / "lsh.csv"
        # errors chosen so the dof-rate is exactly 3: err ~ dofs^-1
        f.write_text("mesh,h,p,dofs,error,rate,seconds\n"
                     "uniform,0.5,3,1000,1e-2,nan,0.0\n"
                     "uniform,0.25,3,8000,1.25e-3,3.0,0.0\n")
        res = plot_convergence(f, tmp_path / "lsh.svg")
        assert abs(res.slopes[("uniform", 3)] - 3.0) <= 1e-9
        assert "dofs" in svg_text(tmp_path / "lsh.svg")

    def test_rejects_other_schema(self, tmp_path):
        f = tmp_path / "m.csv"
        f.write_text("t,UC\n0,0\n1,1\n")
        with pytest.raises(ValueError, match="not a convergence"):
            plot_convergence(f, tmp_path / "m.svg")

    def test_cli_reports_and_writes(self, conv_csv, tmp_path, capsys):
        out = tmp_path / "cli.svg"
        assert conv_main([str(conv_csv), "--out", str(out)]) == 0
        text = capsys.readouterr().out
        assert "slope" in text and out.exists() and out.stat().st_size > 0

    def test_deterministic_bytes(self, conv_csv, tmp_path):
        a = tmp_path / "a.svg"
        b = tmp_path / "b.svg"
        plot_convergence(conv_csv, a)
        plot_convergence(conv_csv, b)
        assert a.read_bytes() == b.read_bytes()


class TestEnergy:
    def test_renders_solver_energy_history(self, tmp_path):
        csv = solver_csv(tmp_path, "energy.csv", "energy", "--p", "2,3",
                         "--T", "2", "--window", "1")
        res = plot_energy(csv, tmp_path / "e.svg")
        assert res.degrees == (2, 3)
        assert (tmp_path / "e.svg").stat().st_size > 0

    def test_constant_series_renders(self, tmp_path):
        f = tmp_path / "flat.csv"
        lines = ["t,p,E,relerr"]
        for t in range(5):
            lines.append(f"{t},2,2.47,1e-3")
        f.write_text("\n".join(lines) + "\n")
        res = plot_energy(f, tmp_path / "flat.svg")
        assert res.degrees == (2,)
        assert (tmp_path / "flat.svg").stat().st_size > 0

    def test_rejects_other_schema(self, tmp_path):
        f = tmp_path / "c.csv"
        f.write_text("h,p,dofs,error,rate,seconds\n1,1,1,1,nan,0\n")
        with pytest.raises(ValueError, match="not an energy"):
            plot_energy(f, tmp_path / "x.svg")


class TestMeasurement:
    def test_three_bumps_get_three_markers(self, tmp_path):
        t = np.linspace(0.0, 1.0, 400)
        u = np.zeros_like(t)
        centers = (0.25, 0.55, 0.8)
        for c, amp in zip(centers, (2e-3, 1e-2, 7e-3)):
            u += amp * np.exp(-((t - c) / 0.02) ** 2)
        f = tmp_path / "m.csv"
        f.write_text("t,UC\n" + "".join(f"{float(a)!r},{float(b)!r}\n"
                                        for a, b in zip(t, u)))
        res = plot_measurement(f, tmp_path / "m.svg")
        assert len(res.arrivals) == 3
        assert all(abs(a - c) <= 0.01 for a, c in zip(res.arrivals, centers))
        assert (tmp_path / "m.svg").stat().st_size > 0

    def test_silent_trace_has_no_markers(self, tmp_path):
        f = tmp_path / "z.csv"
        f.write_text("t,UC\n0,0\n0.5,0\n1,0\n")
        res = plot_measurement(f, tmp_path / "z.svg")
        assert res.arrivals == ()


class TestSnapshot:
    def test_panel_per_time(self, tmp_path):
        lines = ["x,y,t,U"]
        xs = np.linspace(0, 1, 9)
        for tv in (0.1, 0.2):
            for y in xs:
                for x in xs:
                    u = math.sin(math.pi * x) * math.sin(math.pi * y) * tv
                    lines.append(f"{float(x)!r},{float(y)!r},{tv!r},{u!r}")
        f = tmp_path / "s.csv"
        f.write_text("\n".join(lines) + "\n")
        res = plot_snapshot(f, tmp_path / "s.svg")
        assert res.times == (0.1, 0.2)
        assert res.grid_shape == (9, 9)
        assert (tmp_path / "s.svg").stat().st_size > 0

    def test_rejects_other_schema(self, tmp_path):
        f = tmp_path / "e.csv"
        f.write_text("t,p,E,relerr\n0,2,1,0\n")
        with pytest.raises(ValueError, match="not a snapshot"):
            plot_snapshot(f, tmp_path / "x.svg")
