import csv
import io
import json
import math
import subprocess
import sys

import pytest

from nodal_atlas.cli import CSV_HEADER, canonical, main, parse_angle

SQ33 = '{"domain": "square", "n_or_m": 18, "terms": [[3, 3, 1.0, 0.0]]}'
GROUND = '{"domain": "square", "n_or_m": 2, "terms": [[1, 1, 1.0, 0.0]]}'
TORUS11 = json.dumps({"domain": "torus", "n_or_m": 2, "terms": [
    [1, 1, -0.25, 0], [1, -1, 0.25, 0], [-1, 1, 0.25, 0], [-1, -1, -0.25, 0]]})


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestAnalyze:
    def test_checkerboard(self, capsys):
        code, out, _ = run(capsys, "analyze", SQ33)
        rep = json.loads(out)
        assert code == 0 and rep["schema"] == "nodal-atlas/1"
        assert rep["census"]["N"] == 9
        assert rep["index"]["j_max"] == 11
        assert rep["ratios"]["N_over_j_max"] == pytest.approx(9 / 11, abs=1e-11)
        assert rep["bound"]["satisfied"]

    def test_ground_state(self, capsys):
        code, out, _ = run(capsys, "analyze", GROUND)
        rep = json.loads(out)
        assert code == 0
        assert rep["census"]["N"] == 1 and rep["ratios"]["N_over_j_min"] == 1.0
        assert rep["ratios"]["N_over_j_max"] == 1.0

    def test_ratios_recomputable(self, capsys):
        _, out, _ = run(capsys, "analyze", SQ33)
        rep = json.loads(out)
        assert rep["ratios"]["N_over_j_min"] == pytest.approx(rep["census"]["N"] / rep["index"]["j_min"])
        assert rep["ratios"]["polterovich"] == 0.6366197724

    def test_torus_graph(self, capsys):
        code, out, _ = run(capsys, "analyze", TORUS11)
        rep = json.loads(out)
        assert code == 0
        g = rep["graph"]
        assert (g["v"], g["e"], g["f"], g["c"], g["defect"]) == (4, 8, 4, 1, -1)

    @pytest.mark.parametrize("bad", ['{"domain": "square",', "[1, 2]", '{"domain": "disk", "terms": []}',
                                     '{"domain": "square", "terms": [[1, 2, 1.0], [1, 3, 1.0]]}',
                                     "/nonexistent/file.json"])
    def test_invalid_input(self, capsys, bad):
        code, _, err = run(capsys, "analyze", bad)
        assert code == 2 and err.startswith("error")

    def test_lambda_limit(self, capsys):
        big = json.dumps({"domain": "square", "terms": [[21, 20, 1.0]]})
        assert run(capsys, "analyze", big)[0] == 2

    def test_file_and_stdin(self, capsys, tmp_path, monkeypatch):
        p = tmp_path / "f.json"
        p.write_text(GROUND)
        assert run(capsys, "analyze", str(p), "--no-mesh")[0] == 0
        monkeypatch.setattr(sys, "stdin", io.StringIO(GROUND))
        assert run(capsys, "analyze", "-", "--no-mesh")[0] == 0

    def test_deterministic(self, capsys, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        run(capsys, "analyze", SQ33, "--output", str(a))
        run(capsys, "analyze", SQ33, "--output", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_signmap(self, capsys, tmp_path):
        p = tmp_path / "m.pgm"
        assert run(capsys, "analyze", SQ33, "--no-mesh", "--emit-signmap", str(p))[0] == 0
        assert p.read_bytes().startswith(b"P5")

    def test_csv(self, capsys):
        code, out, _ = run(capsys, "analyze", GROUND, "--format", "csv")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0 and tuple(rows[0].keys()) == CSV_HEADER and rows[0]["N"] == "1"


class TestRatioTable:
    def test_diagonal(self, capsys):
        code, out, _ = run(capsys, "ratio-table", "diagonal", "--k-min", "1", "--k-max", "10")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0 and len(rows) == 10
        last = rows[-1]
        assert float(last["lambda"]) == pytest.approx(200 * math.pi**2)
        assert int(last["N"]) == 100 and int(last["j_max"]) == 144
        assert float(last["N_over_j_max"]) == pytest.approx(100 / 144)

    def test_deformation(self, capsys):
        code, out, _ = run(capsys, "ratio-table", "deformation", "--pair", "1,3")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0 and len(rows) == 21
        for r in rows:
            if r["singular_points"] == "0":
                assert r["identity_ok"] == "true"
                assert int(r["N"]) == int(r["N_s"]) + int(r["N_c"]) + 1

    def test_torus_plane(self, capsys):
        code, out, _ = run(capsys, "ratio-table", "torus-plane", "--pair", "1,2", "--k-max", "4")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0 and [r["N"] for r in rows] == ["2"] * 4

    @pytest.mark.parametrize("argv", [("diagonal", "--k-min", "3", "--k-max", "2"),
                                      ("diagonal", "--k-max", "21"),
                                      ("deformation", "--pair", "2,2"),
                                      ("deformation", "--pair", "x")])
    def test_invalid(self, capsys, argv):
        assert run(capsys, "ratio-table", *argv)[0] == 2


class TestLattice:
    def test_examples(self, capsys):
        code, out, _ = run(capsys, "lattice", "--n", "5", "--n", "3", "--n", "65", "--theta", "2pi/9")
        reps = {r["n"]: r for r in json.loads(out)["reports"]}
        assert code == 0
        assert reps[5]["count"] == 8 and reps[5]["membership"]["2pi/9"] is True
        assert reps[3]["empty"] is True and reps[3]["count"] == 0
        assert reps[65]["count"] == 16

    def test_range(self, capsys):
        code, out, _ = run(capsys, "lattice", "--n-min", "1", "--n-max", "50", "--format", "csv")
        assert code == 0 and len(out.strip().splitlines()) == 51

    def test_invalid(self, capsys):
        assert run(capsys, "lattice", "--n", "0")[0] == 2
        assert run(capsys, "lattice", "--n", "5", "--theta", "abc")[0] == 2
        assert run(capsys, "lattice")[0] == 2

    def test_angles(self):
        assert parse_angle("2pi/9") == pytest.approx(2 * math.pi / 9)
        assert parse_angle("pi") == pytest.approx(math.pi)
        assert parse_angle("2*pi/9") == pytest.approx(2 * math.pi / 9)
        assert parse_angle("0.25") == 0.25


class TestMeshAndGraph:
    def test_mesh_verify(self, capsys):
        code, out, _ = run(capsys, "mesh-verify", SQ33)
        rep = json.loads(out)
        assert code == 0 and rep["bound"]["per_line_sign_changes"] == [2, 2, 2, 2]

    def test_mesh_verify_torus_outside_class(self, capsys):
        wave = json.dumps({"domain": "torus", "terms": [[1, 8, 0.5, 0], [-1, -8, 0.5, 0]]})
        assert run(capsys, "mesh-verify", wave)[0] == 2

    def test_graph_check(self, capsys):
        code, out, _ = run(capsys, "graph-check", TORUS11)
        assert code == 0 and json.loads(out)["graph"]["defect"] == -1
        assert run(capsys, "graph-check", SQ33)[0] == 2

    def test_random_graphs(self, capsys):
        code, out, _ = run(capsys, "graph-check", "--random", "--trials", "500", "--seed", "7")
        rep = json.loads(out)
        assert code == 0 and rep["violations"] == 0
        again = run(capsys, "graph-check", "--random", "--trials", "500", "--seed", "7")[1]
        assert again == out


class TestFormatting:
    def test_canonical(self):
        assert canonical({"a": 1 / 3, "b": [2.0, float("nan")]}) == {"a": 0.333333333333, "b": [2.0, None]}

    def test_usage_errors(self, capsys):
        assert run(capsys)[0] == 2
        assert run(capsys, "mesh-verify", SQ33, "--format", "csv")[0] == 2

    def test_console_script(self):
        proc = subprocess.run([sys.executable, "-m", "nodal_atlas.cli", "lattice", "--n", "25"],
                              capture_output=True, text=True, check=False)
        assert proc.returncode == 0 and json.loads(proc.stdout)["reports"][0]["count"] == 12
