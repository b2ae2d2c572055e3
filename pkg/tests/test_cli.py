import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from gridcontour.cli import main
from gridcontour.grid import Grid, grid_to_json


@pytest.fixture
def grid_file(tmp_path):
    y, x = np.mgrid[0:10, 0:12]
    g = Grid.from_array(np.round(100 * np.exp(-((x - 6) ** 2 + (y - 4) ** 2) / 15.0), 3))
    path = tmp_path / "grid.json"
    path.write_text(json.dumps(grid_to_json(g)))
    return path


@pytest.fixture
def range_file(tmp_path):
    path = tmp_path / "range.csv"
    path.write_text("x,y,value\n0.5,0.5,0\n1.5,0.5,3\n2.5,0.5,6\n")
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


class TestLevels:
    def test_density_two_levels(self, capsys, grid_file):
        code, out, _ = run(capsys, "levels", grid_file, "--method", "density", "--tau", "0.1,0.5")
        assert code == 0
        doc = json.loads(out)
        assert doc["method"] == "DensityContour"
        assert len(doc["levels"]) == 2 and doc["taus"] == [0.1, 0.5]

    def test_equal_length(self, capsys, range_file):
        code, out, _ = run(
            capsys, "levels", range_file, "--method", "equal-length", "--m", "5",
            "--divisor-mode", "m-plus-one",
        )
        assert code == 0
        assert json.loads(out)["levels"] == pytest.approx([1, 2, 3, 4, 5])

    def test_tau_out_of_range(self, capsys, grid_file):
        with pytest.raises(SystemExit) as exc:
            main(["levels", str(grid_file), "--method", "density", "--tau", "1.5"])
        assert exc.value.code == 2
        assert "tau must be in (0,1)" in capsys.readouterr().err

    def test_missing_tau_is_usage_error(self, grid_file):
        with pytest.raises(SystemExit) as exc:
            main(["levels", str(grid_file), "--method", "density"])
        assert exc.value.code == 2

    def test_diverging(self, capsys, tmp_path):
        path = tmp_path / "signed.csv"
        path.write_text("x,y,value\n0.5,0.5,-2\n1.5,0.5,-1\n2.5,0.5,1\n3.5,0.5,3\n")
        code, out, _ = run(
            capsys, "levels", path, "--method", "density", "--diverging", "--tau", "0.5"
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["neg"]["side"] == "lower"
        assert doc["neg"]["levels"] == [-2.0] and doc["pos"]["levels"] == [3.0]

    def test_input_format_override(self, capsys, range_file, tmp_path):
        other = tmp_path / "grid.txt"
        other.write_text(range_file.read_text())
        code, _, _ = run(
            capsys, "levels", other, "--input-format", "csv", "--method", "natural", "--m", "1"
        )
        assert code == 0


class TestRegions:
    def test_geojson(self, capsys, grid_file):
        code, out, _ = run(capsys, "regions", grid_file, "--tau", "0.1")
        assert code == 0
        doc = json.loads(out)
        assert doc["type"] == "FeatureCollection" and doc["features"]

    def test_json_mass(self, capsys, grid_file):
        code, out, _ = run(capsys, "regions", grid_file, "--tau", "0.5", "--format", "json")
        assert code == 0
        reg = json.loads(out)["regions"][0]
        assert reg["mass"] >= 0.5

    def test_malformed_file(self, capsys, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("x,y,value\n0.5,zz,1\n")
        code, _, err = run(capsys, "regions", bad, "--tau", "0.5")
        assert code == 1
        assert "line 2" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, _ = run(capsys, "regions", tmp_path / "nope.csv", "--tau", "0.5")
        assert code == 1


class TestRender:
    def test_byte_identical_and_six_classes(self, capsys, grid_file, tmp_path):
        outs = []
        for k in range(2):
            out = tmp_path / f"r{k}.svg"
            code, _, _ = run(
                capsys, "render", grid_file, "--method", "density",
                "--tau", "0.1,0.3,0.5,0.7,0.9", "--out", out,
            )
            assert code == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]
        assert outs[0].count(b'class="legend-class"') == 6

    def test_unknown_scale(self, grid_file, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["render", str(grid_file), "--continuous", "--scale", "viridis",
                  "--out", str(tmp_path / "x.svg")])
        assert exc.value.code == 2

    def test_continuous(self, capsys, grid_file, tmp_path):
        out = tmp_path / "c.svg"
        assert run(capsys, "render", grid_file, "--continuous", "--out", out)[0] == 0
        assert out.read_text().startswith("<?xml")

    def test_levels_pipe_composes(self, grid_file, tmp_path):
        cmd = [sys.executable, "-m", "gridcontour"]
        levels = subprocess.run(
            cmd + ["levels", str(grid_file), "--method", "natural", "--m", "4"],
            capture_output=True, check=True,
        ).stdout
        piped = subprocess.run(
            cmd + ["render", str(grid_file), "--levels", "-", "--out", "-"],
            input=levels, capture_output=True, check=True,
        ).stdout
        direct = subprocess.run(
            cmd + ["render", str(grid_file), "--method", "natural", "--m", "4", "--out", "-"],
            capture_output=True, check=True,
        ).stdout
        assert piped == direct

    def test_bad_levels_json(self, capsys, grid_file, tmp_path):
        lv = tmp_path / "lv.json"
        lv.write_text("{not json")
        code, _, _ = run(capsys, "render", grid_file, "--levels", lv, "--out", tmp_path / "o.svg")
        assert code == 1


class TestSimulate:
    def test_rows_and_determinism(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for p in (a, b):
            assert run(capsys, "simulate", "--preset", "paper-3", "--n", "4000",
                       "--seed", "1", "--out", p)[0] == 0
        assert a.read_bytes() == b.read_bytes()
        rows = list(csv.DictReader(io.StringIO(a.read_text())))
        assert len(rows) == 4000
        freq = np.bincount([int(r["component"]) for r in rows]) / 4000
        np.testing.assert_allclose(freq, [0.25, 0.75], atol=0.03)

    def test_seed_required(self):
        with pytest.raises(SystemExit) as exc:
            main(["simulate", "--preset", "paper-1", "--n", "10"])
        assert exc.value.code == 2


class TestBench:
    ARGS = ["bench", "--densities", "paper-1", "--n", "200", "--grid", "21x21",
            "--replicates", "2", "--proxy-n", "20000", "--seed", "5"]

    def test_csv_schema_and_determinism(self, capsys):
        code, out1, _ = run(capsys, *self.ARGS)
        assert code == 0
        _, out2, _ = run(capsys, *self.ARGS)
        assert out1 == out2
        assert out1.splitlines()[0] == "density,n,M,method,tau,mean_err,sd_err,failed"

    def test_config_file(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "densities": ["paper-1"], "sample_sizes": [200], "grid_sizes": [[21, 21]],
            "replicates": 2, "proxy_N": 20000, "truth_dims": [61, 61],
        }))
        code, out, _ = run(capsys, "bench", "--config", cfg, "--seed", "5")
        assert code == 0 and len(out.splitlines()) == 21

    def test_jobs_env(self, capsys, monkeypatch):
        monkeypatch.setenv("GRIDCONTOUR_JOBS", "2")
        _, parallel, _ = run(capsys, *self.ARGS)
        monkeypatch.delenv("GRIDCONTOUR_JOBS")
        _, serial, _ = run(capsys, *self.ARGS)
        assert parallel == serial

    def test_unknown_preset(self, capsys):
        code, _, err = run(capsys, "bench", "--densities", "nope", "--seed", "1")
        assert code == 1 and "unknown preset" in err


class TestSensitivity:
    def test_gaussian_zero_own(self, capsys, grid_file):
        code, out, _ = run(
            capsys, "sensitivity", grid_file, "--model", "gaussian", "--sd", "0",
            "--replicates", "3", "--seed", "0", "--reference", "own",
        )
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert rows and all(float(r["mean_err"]) == 0 for r in rows)

    def test_poisson_needs_integers(self, capsys, grid_file):
        code, _, _ = run(capsys, "sensitivity", grid_file, "--model", "poisson", "--seed", "0")
        assert code == 1

    def test_gaussian_needs_sd(self, grid_file):
        with pytest.raises(SystemExit) as exc:
            main(["sensitivity", str(grid_file), "--model", "gaussian", "--seed", "0"])
        assert exc.value.code == 2
