"""
Tests for the command-line surface.
"""

import json

import pytest

from src.cli import EXIT_FAIL, EXIT_PASS, EXIT_USAGE, main
from src.models.report import VerificationReport


class TestAnalyze:
    def test_cycle_passes(self, capsys):
        """Test analyze --cycle 7 exits 0 with a passing JSON report"""
        assert main(["analyze", "--cycle", "7"]) == EXIT_PASS
        out = capsys.readouterr().out
        data = json.loads(out)
        assert data["verdict"] == "pass"
        assert data["graph"]["n"] == 7
        report = VerificationReport.model_validate_json(out)
        assert report.qracah.chosen is not None
        assert report.vertices[0].is_spin_model

    def test_hypercube_not_qracah(self, capsys):
        """Test Q4 fails with NotQRacah recorded under qracah.error"""
        assert main(["analyze", "--hypercube", "4"]) == EXIT_FAIL
        data = json.loads(capsys.readouterr().out)
        assert data["verdict"] == "fail"
        assert data["qracah"]["error"]["kind"] == "NotQRacah"

    def test_tiny_tolerance_fails(self, capsys):
        """Test an unreachable tolerance turns roundoff into failures"""
        assert main(["analyze", "--cycle", "7", "--tolerance", "1e-20"]) == EXIT_FAIL
        assert json.loads(capsys.readouterr().out)["verdict"] == "fail"

    def test_small_cycle_is_usage_error(self, capsys):
        """Test C5 exits 2 with DiameterTooSmall"""
        assert main(["analyze", "--cycle", "5"]) == EXIT_USAGE
        assert json.loads(capsys.readouterr().out)["error"]["kind"] == "DiameterTooSmall"

    def test_unreadable_file(self, tmp_path, capsys):
        """Test a missing graph file exits 2 with ParseError"""
        assert main(["analyze", "--file", str(tmp_path / "absent.txt")]) == EXIT_USAGE
        assert json.loads(capsys.readouterr().out)["error"]["kind"] == "ParseError"

    def test_malformed_file(self, tmp_path, capsys):
        """Test a bad edge line exits 2"""
        path = tmp_path / "bad.txt"
        path.write_text("3 2\n0 1\n1 x\n")
        assert main(["analyze", "--file", str(path)]) == EXIT_USAGE

    def test_text_format(self, capsys):
        """Test --format text prints the verdict line"""
        assert main(["analyze", "--cycle", "7", "--format", "text"]) == EXIT_PASS
        out = capsys.readouterr().out
        assert "verdict=pass" in out
        assert "spin.verdict" in out

    def test_output_file(self, tmp_path):
        """Test --output writes the report to a file"""
        path = tmp_path / "report.json"
        assert main(["analyze", "--cycle", "7", "--output", str(path)]) == EXIT_PASS
        assert json.loads(path.read_text())["verdict"] == "pass"

    def test_base_vertex_out_of_range(self):
        """Test a base vertex outside the graph exits 2"""
        assert main(["analyze", "--cycle", "7", "--base-vertex", "9"]) == EXIT_USAGE

    def test_seeded_vertex_sample(self, capsys):
        """Test --seed fixes the sampled vertices and the report"""
        args = ["analyze", "--cycle", "7", "--sample-vertices", "3", "--seed", "5"]
        assert main(args) == EXIT_PASS
        first = capsys.readouterr().out
        assert main(args) == EXIT_PASS
        assert capsys.readouterr().out == first
        xs = [v["x"] for v in json.loads(first)["vertices"]]
        assert len(xs) == 3 and xs[0] == 0
        assert len(set(xs)) == 3

    def test_bad_vertex_sample(self):
        """Test --sample-vertices 0 is a usage error"""
        with pytest.raises(SystemExit) as excinfo:
            main(["analyze", "--cycle", "7", "--sample-vertices", "0"])
        assert excinfo.value.code == 2

    def test_sources_exclusive(self):
        """Test two graph sources are rejected by argparse"""
        with pytest.raises(SystemExit) as excinfo:
            main(["analyze", "--cycle", "7", "--hypercube", "3"])
        assert excinfo.value.code == 2


class TestScan:
    def test_writes_tables(self, tmp_path, capsys):
        """Test scan writes JSON and CSV tables containing C7"""
        prefix = tmp_path / "d3"
        assert main(["scan", "--diameter", "3", "--unit-circle-max", "8", "--no-real",
                     "--out-prefix", str(prefix)]) == EXIT_PASS
        assert "D=3" in capsys.readouterr().out
        rows = (tmp_path / "d3.csv").read_text().splitlines()
        assert rows[0].startswith("D,q_re,q_im")
        assert any(row.split(",")[7] == "7" for row in rows[1:])
        assert json.loads((tmp_path / "d3.json").read_text())

    def test_small_diameter(self):
        """Test --diameter 2 is a usage error"""
        with pytest.raises(SystemExit) as excinfo:
            main(["scan", "--diameter", "2"])
        assert excinfo.value.code == 2

    def test_bad_real_grid(self):
        """Test --real-q-max at or below 1 is a usage error"""
        with pytest.raises(SystemExit) as excinfo:
            main(["scan", "--diameter", "3", "--real-q-max", "0.5"])
        assert excinfo.value.code == 2


class TestIdentities:
    def test_deterministic(self, capsys):
        """Test the same seed prints the same report"""
        assert main(["identities", "--diameter", "4", "--samples", "10", "--seed", "7"]) == EXIT_PASS
        first = capsys.readouterr().out
        assert main(["identities", "--diameter", "4", "--samples", "10", "--seed", "7"]) == EXIT_PASS
        assert capsys.readouterr().out == first
        assert json.loads(first)["passed"]

    def test_zero_samples(self):
        """Test --samples 0 is a usage error"""
        with pytest.raises(SystemExit) as excinfo:
            main(["identities", "--diameter", "3", "--samples", "0"])
        assert excinfo.value.code == 2
