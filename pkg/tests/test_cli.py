import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from rotorbeats import __version__
from rotorbeats.analysis import beat_envelope, cluster_points
from rotorbeats.cli import EVOLVE_COLUMNS, main
from rotorbeats.coherent import PhasePoint, z_from_phase
from rotorbeats.dynamics import evolve_series


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def column(rows, header, name):
    k = header.index(name)
    return np.array([float(r[k]) for r in rows])


@pytest.fixture(scope="module")
def evolve_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("evolve") / "theta.csv"
    assert main(["--mode", "evolve", "--j", "11", "--out", str(out)]) == 0
    return out


class TestEvolve:
    def test_layout(self, evolve_run):
        header, rows = read_csv(evolve_run)
        assert header == EVOLVE_COLUMNS
        assert len(rows) == 2000
        raw = evolve_run.read_bytes()
        assert b"\r" not in raw and raw.endswith(b"\n")

    def test_beats_visible_in_file(self, evolve_run):
        header, rows = read_csv(evolve_run)
        rep = beat_envelope(column(rows, header, "t"), column(rows, header, "theta"), center=math.pi / 2)
        assert rep.minima_times[:2] == pytest.approx([math.pi, 3 * math.pi], abs=0.1)

    def test_values_round_trip_exactly(self, evolve_run):
        header, rows = read_csv(evolve_run)
        t = column(rows, header, "t")
        ts = evolve_series(z_from_phase(PhasePoint.from_j(11)), t)
        assert np.array_equal(column(rows, header, "theta"), ts.theta)
        assert np.array_equal(column(rows, header, "xplus_im"), ts.xplus_mean.imag)
        assert np.array_equal(column(rows, header, "j3_mean"), ts.j_mean[:, 2])
        for r in rows[:5]:
            assert all(len(v.split("e")[0].replace("-", "").replace(".", "")) == 17 for v in r[:-1])

    def test_sidecar(self, evolve_run):
        meta = json.loads(evolve_run.with_name("theta.csv.meta.json").read_text())
        assert meta["version"] == __version__
        assert meta["j_max"] >= 27
        assert meta["tail_mass"] < 1e-20
        assert meta["config"]["samples"] == 2000
        assert meta["config"]["l_norm"] == math.sqrt(132)

    def test_config_round_trip(self, evolve_run, tmp_path):
        again = tmp_path / "again.csv"
        sidecar = evolve_run.with_name("theta.csv.meta.json")
        assert main(["--config", str(sidecar), "--out", str(again)]) == 0
        assert again.read_bytes() == evolve_run.read_bytes()

    def test_rotation(self, tmp_path):
        out = tmp_path / "rot.csv"
        assert main(["--j", "11", "--hamiltonian", "rotation", "--t1", str(4 * math.pi), "--samples", "500",
                     "--out", str(out)]) == 0
        header, rows = read_csv(out)
        t = column(rows, header, "t")
        assert np.ptp(column(rows, header, "theta")) < 1e-10
        assert np.polyfit(t, column(rows, header, "phi_unwrapped"), 1)[0] == pytest.approx(1.0, abs=1e-10)

    def test_two_samples(self, tmp_path):
        out = tmp_path / "two.csv"
        assert main(["--samples", "2", "--out", str(out)]) == 0
        header, rows = read_csv(out)
        assert len(rows) == 2 and all(len(r) == len(header) for r in rows)

    def test_json_format(self, tmp_path):
        out = tmp_path / "two.json"
        assert main(["--samples", "3", "--format", "json", "--out", str(out)]) == 0
        body = json.loads(out.read_text())
        assert body["columns"] == EVOLVE_COLUMNS
        assert len(body["rows"]) == 3

    def test_forced_small_truncation_fails(self, tmp_path, capsys):
        assert main(["--jmax", "8", "--samples", "2", "--out", str(tmp_path / "x.csv")]) == 1
        assert "inadequate" in capsys.readouterr().err


class TestDensity:
    def test_initial_density(self, tmp_path):
        out = tmp_path / "d0.csv"
        assert main(["--mode", "density", "--samples", "1", "--t0", "0", "--out", str(out)]) == 0
        header, rows = read_csv(out)
        assert header == ["theta", "phi", "p"]
        assert len(rows) == 128 * 256
        th = np.array([float(r[0]) for r in rows]).reshape(128, 256)
        assert np.all(np.diff(th[:, 0]) > 0) and np.ptp(th[0]) == 0  # row-major
        frame = json.loads(out.with_name("d0.csv.meta.json").read_text())["frames"][0]
        assert frame["integral"] == pytest.approx(1.0, abs=1e-6)
        maxima = [c for c in frame["critical_points"] if c["kind"] == "maximum"]
        idx = [(c["i_theta"], c["i_phi"]) for c in maxima]
        assert all(abs(a - b) <= 2 or 256 - abs(a - b) <= 2 for (_, a) in idx for (_, b) in idx)

    def test_saddle_at_beat_node(self, tmp_path):
        out = tmp_path / "dpi.csv"
        assert main(["--mode", "density", "--samples", "1", "--t0", repr(math.pi), "--out", str(out)]) == 0
        frame = json.loads(out.with_name("dpi.csv.meta.json").read_text())["frames"][0]
        assert any(c["kind"] == "saddle" for c in frame["critical_points"])

    def test_minimal_grid(self, tmp_path):
        out = tmp_path / "small.csv"
        assert main(["--mode", "density", "--samples", "1", "--grid", "16x16", "--out", str(out)]) == 0
        _, rows = read_csv(out)
        assert len(rows) == 256
        frame = json.loads(out.with_name("small.csv.meta.json").read_text())["frames"][0]
        assert frame["integral"] == pytest.approx(1.0, abs=1e-2)

    def test_several_times(self, tmp_path):
        out = tmp_path / "many.csv"
        assert main(["--mode", "density", "--samples", "3", "--t1", "2", "--grid", "16x32", "--out", str(out)]) == 0
        meta = json.loads(out.with_name("many.csv.meta.json").read_text())
        assert [f["file"] for f in meta["frames"]] == [f"many_t{k:04d}.csv" for k in range(3)]
        assert all((tmp_path / f["file"]).exists() for f in meta["frames"])


class TestTrajectory:
    def test_rotation_circle(self, tmp_path):
        out = tmp_path / "traj.csv"
        assert main(["--mode", "trajectory", "--hamiltonian", "rotation", "--samples", "100", "--out", str(out)]) == 0
        header, rows = read_csv(out)
        assert header == ["t", "x", "y", "z"]
        assert np.ptp(column(rows, header, "z")) < 1e-10

    def test_single_sample(self, tmp_path):
        out = tmp_path / "one.csv"
        assert main(["--mode", "trajectory", "--samples", "1", "--out", str(out)]) == 0
        header, rows = read_csv(out)
        assert len(rows) == 1
        assert np.linalg.norm([float(v) for v in rows[0][1:]]) == pytest.approx(1.0, abs=1e-15)

    def test_undefined_phase(self, tmp_path, capsys):
        args = ["--mode", "trajectory", "--l3", "0", "--l-norm", "0", "--theta-bar", "0", "--samples", "2",
                "--out", str(tmp_path / "pole.csv")]
        assert main(args) == 1
        assert "phi undefined at t = 0.0000000000000000e+00" in capsys.readouterr().err


class TestVerify:
    def test_default_passes_and_is_deterministic(self, capsys, tmp_path):
        out = tmp_path / "report.json"
        assert main(["--mode", "verify", "--out", str(out)]) == 0
        first = capsys.readouterr().out
        report = json.loads(first)
        assert report["pass"] and all(c["pass"] for c in report["checks"])
        assert {c["name"] for c in report["checks"]} >= {"eigen_residual", "construction_equivalence"}
        assert out.read_text() == first
        assert main(["--mode", "verify", "--out", str(out)]) == 0
        assert capsys.readouterr().out == first

    def test_sabotaged_truncation_fails(self, capsys):
        assert main(["--mode", "verify", "--jmax", "3"]) == 1
        checks = {c["name"]: c for c in json.loads(capsys.readouterr().out)["checks"]}
        assert not checks["eigen_residual"]["pass"]
        assert checks["eigen_residual"]["measured"] > checks["eigen_residual"]["threshold"]


class TestUsage:
    @pytest.mark.parametrize(
        "args",
        [
            ["--t0", "2", "--t1", "1"],
            ["--grid", "8x8"],
            ["--grid", "16x17"],
            ["--l3", "5", "--l-norm", "4"],
            ["--j", "11", "--l3", "3"],
            ["--samples", "0"],
            ["--jmax", "1"],
            ["--threads", "0"],
        ],
    )
    def test_invalid_config_exit_2(self, args, tmp_path):
        assert main(args + ["--out", str(tmp_path / "x.csv")]) == 2

    @pytest.mark.parametrize("args", [["--mode", "plot"], ["--grid", "big"], ["--jmax", "lots"]])
    def test_parser_errors_exit_2(self, args):
        with pytest.raises(SystemExit) as info:
            main(args)
        assert info.value.code == 2

    def test_unknown_config_key(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"config": {"colour": "red"}}))
        assert main(["--config", str(cfg)]) == 2


def test_module_entry_point(tmp_path):
    out = tmp_path / "m.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "rotorbeats", "--samples", "2", "--out", str(out)], capture_output=True, text=True
    )
    assert proc.returncode == 0, proc.stderr
    assert out.exists()


def test_threads_do_not_change_bytes(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["--samples", "300", "--threads", "1", "--out", str(a)]) == 0
    assert main(["--samples", "300", "--threads", "8", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
