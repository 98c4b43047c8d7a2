import json
import math

import numpy as np
import pytest

from cosbound.cli import main


def write_planar(path, degrees=(0.0, 30.0, 60.0, 90.0)):
    lines = []
    for d in degrees:
        r = math.radians(d)
        lines.append(f"{math.cos(r)!r},{math.sin(r)!r}")
    path.write_text("\n".join(lines) + "\n")
    return str(path)


def write_sparse(path):
    path.write_text("0:1.0\n1:1.0\n0:1.0 1:1.0\n2:1.0\n")
    return str(path)


@pytest.fixture()
def planar_file(tmp_path):
    return write_planar(tmp_path / "data.csv")


@pytest.fixture()
def vp_index(tmp_path, planar_file):
    out = str(tmp_path / "vp.json")
    assert main(["build", "--in", planar_file, "--format", "dense", "--index", "vp",
                 "--leaf-capacity", "1", "--out", out]) == 0
    return out


class TestSurface:
    def test_stdout_csv(self, capsys):
        assert main(["surface", "--bound", "mult", "--steps", "3"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "s1,s2,value"
        assert len(lines) == 10
        # corner (-1, -1): mult gives 1 exactly
        assert lines[1].split(",") == ["-1.0", "-1.0", "1.0"]

    def test_out_file(self, tmp_path, capsys):
        out = tmp_path / "surf.csv"
        assert main(["surface", "--bound", "euclidean", "--steps", "3", "--out", str(out)]) == 0
        assert capsys.readouterr().out == ""
        assert out.read_text().splitlines()[0] == "s1,s2,value"

    def test_unknown_bound_is_usage_error(self):
        assert main(["surface", "--bound", "chebyshev"]) == 1

    def test_bad_steps_is_usage_error(self, capsys):
        assert main(["surface", "--bound", "mult", "--steps", "1"]) == 1
        assert "error" in capsys.readouterr().err

    def test_custom_window(self, capsys):
        assert main(["surface", "--bound", "arccos", "--lo", "0", "--hi", "1", "--steps", "2"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[1].split(",")[:2] == ["0.0", "0.0"]


class TestReport:
    def test_small_grid(self, capsys):
        assert main(["report", "--steps", "201"]) == 0
        captured = capsys.readouterr()
        got = dict(line.split(",") for line in captured.out.splitlines()[1:])
        assert got["grid_steps"] == "201"
        assert float(got["euclidean_mean"]) == pytest.approx(0.2447, abs=0.02)
        assert float(got["arccos_mean"]) == pytest.approx(0.3121, abs=0.02)
        assert float(got["arccos_gain_pct"]) == pytest.approx(27.5, abs=3.0)
        assert float(got["max_abs_diff_mult_arccos"]) <= 1e-13
        assert got["ordering_violations"] == "0"
        assert "grid" in captured.err  # progress goes to stderr


class TestStability:
    def test_small_grid(self, capsys):
        assert main(["stability", "--steps", "101"]) == 0
        got = dict(line.split(",") for line in capsys.readouterr().out.splitlines()[1:])
        assert float(got["max_abs_diff_mult_arccos"]) <= 1e-13
        assert float(got["max_abs_diff_variant_mult"]) <= 1e-13


class TestBench:
    def test_tiny_run_with_csv(self, tmp_path, capsys):
        out = tmp_path / "bench.csv"
        code = main(["bench", "--size", "4096", "--warmup", "1", "--iters", "2",
                     "--target", "1e-9", "--out", str(out)])
        assert code == 0
        table = capsys.readouterr().out
        assert "subject" in table and "arccos" in table and "# config:" in table
        lines = out.read_text().splitlines()
        assert lines[0] == "subject,mean_ns,stddev_ns"
        assert len(lines) == 9

    def test_bad_size_is_usage_error(self):
        assert main(["bench", "--size", "0"]) == 1


class TestBuildAndQuery:
    def test_vp_knn_inline(self, vp_index, capsys):
        q = f"{math.cos(math.radians(10.0))!r},{math.sin(math.radians(10.0))!r}"
        assert main(["query", "--index", vp_index, "--q", q, "--k", "2"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert [r["id"] for r in payload["results"]] == [0, 1]
        assert payload["results"][0]["similarity"] == pytest.approx(
            math.cos(math.radians(10.0)), abs=1e-12
        )

    def test_vp_range_tau_deg(self, vp_index, capsys):
        q = f"{math.cos(math.radians(10.0))!r},{math.sin(math.radians(10.0))!r}"
        assert main(["query", "--index", vp_index, "--q", q, "--tau-deg", "35"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert [r["id"] for r in payload["results"]] == [0, 1]

    def test_vp_range_tau_with_stats(self, vp_index, capsys):
        assert main(["query", "--index", vp_index, "--q", "1.0,0.0",
                     "--tau", "0.99", "--stats"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert [r["id"] for r in payload["results"]] == [0]
        assert payload["stats"]["sims_computed"] >= 1

    def test_query_file_batch(self, vp_index, tmp_path, capsys):
        qf = tmp_path / "queries.csv"
        qf.write_text("1.0,0.0\n0.0,1.0\n")
        assert main(["query", "--index", vp_index, "--q-file", str(qf), "--k", "1"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert [q["results"][0]["id"] for q in payload["queries"]] == [0, 3]

    def test_laesa_round_trip(self, tmp_path, planar_file, capsys):
        out = str(tmp_path / "laesa.json")
        assert main(["build", "--in", planar_file, "--format", "dense", "--index", "laesa",
                     "--pivots", "2", "--out", out]) == 0
        capsys.readouterr()
        assert main(["query", "--index", out, "--q", "1.0,0.0", "--k", "2"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert [r["id"] for r in payload["results"]] == [0, 1]

    def test_sparse_round_trip(self, tmp_path, capsys):
        data = write_sparse(tmp_path / "data.txt")
        out = str(tmp_path / "vp.json")
        assert main(["build", "--in", data, "--format", "sparse", "--index", "vp",
                     "--leaf-capacity", "1", "--out", out]) == 0
        capsys.readouterr()
        assert main(["query", "--index", out, "--q", "0:1.0 1:1.0", "--k", "1"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["results"][0]["id"] == 2
        assert payload["results"][0]["similarity"] == pytest.approx(1.0, abs=1e-12)


class TestExitCodes:
    def test_missing_required_flag_is_1(self, capsys):
        assert main(["build", "--format", "dense"]) == 1
        assert "error" in capsys.readouterr().err

    def test_unknown_command_is_1(self):
        assert main(["frobnicate"]) == 1

    def test_bad_query_vector_is_1(self, vp_index, capsys):
        assert main(["query", "--index", vp_index, "--q", "1.0,spam", "--k", "1"]) == 1
        assert "--q" in capsys.readouterr().err

    def test_zero_query_vector_is_1(self, vp_index):
        assert main(["query", "--index", vp_index, "--q", "0.0,0.0", "--k", "1"]) == 1

    def test_bad_k_is_1(self, vp_index, capsys):
        assert main(["query", "--index", vp_index, "--q", "1.0,0.0", "--k", "0"]) == 1
        assert "--k" in capsys.readouterr().err

    def test_tau_out_of_range_is_1(self, vp_index):
        assert main(["query", "--index", vp_index, "--q", "1.0,0.0", "--tau", "1.5"]) == 1

    def test_pivots_exceeding_n_is_1(self, tmp_path, planar_file):
        out = str(tmp_path / "laesa.json")
        assert main(["build", "--in", planar_file, "--format", "dense", "--index", "laesa",
                     "--pivots", "9", "--out", out]) == 1

    def test_malformed_data_is_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("1.0,2.0\n1.0,oops\n")
        assert main(["build", "--in", str(bad), "--format", "dense", "--index", "vp",
                     "--out", str(tmp_path / "x.json")]) == 2
        assert "bad.csv:2" in capsys.readouterr().err

    def test_missing_input_file_is_2(self, tmp_path):
        assert main(["build", "--in", str(tmp_path / "absent.csv"), "--format", "dense",
                     "--index", "vp", "--out", str(tmp_path / "x.json")]) == 2

    def test_zero_vector_row_is_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("1.0,0.0\n0.0,0.0\n")
        assert main(["build", "--in", str(bad), "--format", "dense", "--index", "vp",
                     "--out", str(tmp_path / "x.json")]) == 2
        assert "zero vector" in capsys.readouterr().err

    def test_blank_query_file_line_is_2(self, vp_index, tmp_path):
        qf = tmp_path / "queries.csv"
        qf.write_text("1.0,0.0\n\n")
        assert main(["query", "--index", vp_index, "--q-file", str(qf), "--k", "1"]) == 2

    def test_tampered_index_is_3(self, vp_index, capsys):
        with open(vp_index) as f:
            obj = json.load(f)
        obj["vectors"][0][0] = math.nextafter(obj["vectors"][0][0], 2.0)
        with open(vp_index, "w") as f:
            json.dump(obj, f)
        assert main(["query", "--index", vp_index, "--q", "1.0,0.0", "--k", "1"]) == 3
        assert "verification" in capsys.readouterr().err


class TestOracleCheckCommand:
    def test_clean_run_exits_0(self, tmp_path, capsys):
        rng = np.random.default_rng(0)
        g = rng.standard_normal((120, 5))
        rows = [",".join(repr(float(x)) for x in row) for row in g]
        data = tmp_path / "data.csv"
        data.write_text("\n".join(rows) + "\n")
        code = main(["oracle-check", "--in", str(data), "--format", "dense",
                     "--queries", "5", "--k", "3", "--leaf-capacity", "4",
                     "--pivots", "6", "--selectivity", "0.05"])
        assert code == 0
        got = dict(line.split(",") for line in capsys.readouterr().out.splitlines()[1:])
        assert got["n"] == "120"
        assert got["mismatches"] == "0"
        assert float(got["mean_sims_vp_range"]) <= 120.0

    def test_bad_queries_is_usage_error(self, planar_file):
        assert main(["oracle-check", "--in", planar_file, "--queries", "0"]) == 1
