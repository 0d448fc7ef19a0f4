"""CLI contract: commands, exit codes, determinism of JSON output."""

import json
import subprocess
import sys

from steenweb.corpus import data_dir


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "steenweb.cli", *args],
        capture_output=True, text=True,
    )


class TestReduce:
    def test_worked_examples(self):
        for expr, p, want in [("Sq2 . Sq2", "2", "Sq3 . Sq1"),
                              ("P1 . P1", "3", "2 P2"),
                              ("Sq4", "2", "Sq4")]:
            proc = run_cli("reduce", expr, "--prime", p, "--format", "table")
            assert proc.returncode == 0
            assert proc.stdout.strip() == want

    def test_json_shape(self):
        proc = run_cli("reduce", "Sq2 . Sq2", "--prime", "2")
        doc = json.loads(proc.stdout)
        assert doc["canonical"] == "Sq3 . Sq1"

    def test_parse_error_exit_2(self):
        proc = run_cli("reduce", "Sq2 . Zq1", "--prime", "2")
        assert proc.returncode == 2
        assert "position" in proc.stderr


class TestRing:
    def test_minimal_period_shipped_file(self):
        proc = run_cli("ring", "minimal-period", "--file", "cp6_z2.json")
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["minimal_period"] == 2

    def test_classify_shipped_file(self):
        proc = run_cli("ring", "classify", "--file", "s3xhp2_q.json")
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["label"] == "S3xHP"

    def test_validate_corrupted_exits_1_with_witness(self, tmp_path):
        src = json.loads((data_dir() / "m6_g1_q.json").read_text())
        for e in src["products"]:
            if e["i"] == 2 and e["j"] == 4:
                e["coords"] = [2]
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(src))
        proc = run_cli("ring", "validate", "--file", str(bad))
        assert proc.returncode == 1
        doc = json.loads(proc.stdout)
        assert not doc["ok"] and doc["failures"][0]["witness"]

    def test_validate_malformed_exits_2(self, tmp_path):
        bad = tmp_path / "broken.json"
        bad.write_text(json.dumps({"n": 3, "field": "Q", "dims": [1]}))
        proc = run_cli("ring", "validate", "--file", str(bad))
        assert proc.returncode == 2

    def test_missing_file_exit_2(self):
        proc = run_cli("ring", "validate", "--file", "nope.json")
        assert proc.returncode == 2

    def test_gcd_check(self):
        proc = run_cli("ring", "gcd-check", "--file", "cp8_q.json",
                       "--degree", "6")
        assert proc.returncode == 0
        doc = json.loads(proc.stdout)
        assert doc["result"] == "pass" and doc["gcd"] == 2

    def test_bodd_check(self):
        proc = run_cli("ring", "bodd-check", "--file", "hp3_q.json")
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["result"] == "pass"


class TestWeb:
    def test_analyze_case3_instance(self):
        proc = run_cli("web", "analyze", "--file", "web_case3_n32_r10.json")
        assert proc.returncode == 0
        doc = json.loads(proc.stdout)
        assert doc["status"] == "certificate" and doc["certificate"]["case"] == 3

    def test_analyze_rank_precondition_exit_2(self):
        proc = run_cli("web", "analyze", "--file", "web_small_n8_r4.json")
        assert proc.returncode == 2

    def test_random_deterministic(self):
        args = ("web", "random", "--n", "16", "--r", "8",
                "--count", "4", "--seed", "7")
        out1 = run_cli(*args).stdout
        out2 = run_cli(*args).stdout
        assert out1 == out2
        doc = json.loads(out1)
        assert doc["count"] == 4 and len(doc["results"]) == 4


class TestVerify:
    def test_hit_lemma_small(self):
        proc = run_cli("verify", "hit-lemma", "--p", "3", "--kmax", "40")
        assert proc.returncode == 0
        doc = json.loads(proc.stdout)
        assert doc["result"] == "pass" and doc["checks"] > 40

    def test_suite_json_byte_identical(self):
        args = ("verify", "power-of-two", "--count", "8", "--seed", "5")
        out1 = run_cli(*args).stdout
        out2 = run_cli(*args).stdout
        assert out1 == out2 and json.loads(out1)["result"] == "pass"

    def test_out_flag_writes_file(self, tmp_path):
        target = tmp_path / "report.json"
        proc = run_cli("verify", "sq-decomposition", "--lmax", "20",
                       "--out", str(target))
        assert proc.returncode == 0
        assert json.loads(target.read_text())["result"] == "pass"
