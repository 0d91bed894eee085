import csv
import json

from ejmnet import basis_to_json_dict, ejm_basis
from ejmnet.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestTriangleCommand:
    def test_json_contains_exact_entries(self, capsys):
        code, out, _ = run_cli(capsys, "triangle", "--basis", "ejm")
        assert code == 0
        payload = json.loads(out)
        entries = payload["distribution"]["probabilities"]
        assert len(entries) == 64
        all_equal = [e for e in entries if len(set(e["outcome"])) == 1]
        assert all(e["dyadic"] == {"num": 25, "log2den": 8} for e in all_equal)

    def test_byte_identical_reruns(self, capsys):
        _, first, _ = run_cli(capsys, "triangle")
        _, second, _ = run_cli(capsys, "triangle")
        assert first == second

    def test_csv_format(self, capsys):
        code, out, _ = run_cli(capsys, "triangle", "--format", "csv")
        assert code == 0
        rows = list(csv.DictReader(out.splitlines()))
        assert len(rows) == 64
        first = next(r for r in rows if r["outcome"] == "1,1,1")
        assert first["dyadic_num"] == "25"


class TestTable2Command:
    def test_matches_reference_values(self, capsys):
        code, out, _ = run_cli(capsys, "table2", "--max-n", "10")
        assert code == 0
        rows = {r["N"]: r for r in csv.DictReader(out.splitlines())}
        assert rows["7"]["line_exact"] == "2521*2^-18"
        assert rows["8"]["polygon_exact"] == "9409*2^-20"
        assert rows["10"]["conditional_exact"] == "32761/35113"
        assert rows["1"]["polygon"] == ""


class TestChainCommands:
    def test_event_query(self, capsys):
        code, out, _ = run_cli(capsys, "polygon", "--n", "10", "--event", "all-equal")
        assert code == 0
        payload = json.loads(out)
        assert payload["dyadic"] == {"num": 32761, "log2den": 24}

    def test_tuple_event(self, capsys):
        code, out, _ = run_cli(capsys, "line", "--n", "2", "--event", "tuple=1,1")
        assert code == 0
        payload = json.loads(out)
        assert abs(payload["p"] - 7.0 / 64.0) < 1e-12

    def test_capacity_exit_code(self, capsys):
        code, _, err = run_cli(capsys, "line", "--n", "9")
        assert code == 2
        assert "capacity" in err

    def test_bad_event_exit_code(self, capsys):
        code, _, _ = run_cli(capsys, "line", "--n", "3", "--event", "sideways")
        assert code == 1


class TestQmodelCommand:
    def test_scan_peak(self, capsys):
        code, out, _ = run_cli(capsys, "qmodel", "--scan", "0:1:0.25")
        assert code == 0
        payload = json.loads(out)
        assert payload["peak"]["q"] == 0.5
        assert abs(payload["peak"]["p_all_equal"] - 61 / 256) < 1e-12
        assert len(payload["rows"]) == 5

    def test_audit_rows(self, capsys):
        code, out, _ = run_cli(capsys, "qmodel", "--q", "0.5", "--audit")
        payload = json.loads(out)
        assert code == 0
        assert len(payload["flag_audit"]) == 8


class TestValidateCommand:
    def test_builtin_bases_pass(self, capsys):
        code, out, _ = run_cli(capsys, "validate")
        assert code == 0
        payload = json.loads(out)
        assert payload["ok"] and len(payload["bases"]) == 4

    def test_perturbed_basis_file_flagged(self, capsys, tmp_path):
        payload = basis_to_json_dict(ejm_basis())
        payload["states"][0][0][0] += 1e-3
        path = tmp_path / "basis.json"
        path.write_text(json.dumps(payload), encoding="utf-8")
        code, out, _ = run_cli(capsys, "validate", "--basis", "ejm", "--basis-file", str(path))
        assert code == 1
        report = json.loads(out)
        key = f"file:{path}"
        assert report["bases"][key]["ok"] is False
        assert report["bases"]["ejm"]["ok"] is True


class TestSearchCommand:
    def test_exhaustive_all_equal(self, capsys):
        code, out, _ = run_cli(
            capsys, "search", "--method", "exhaustive", "--cardinality", "2",
            "--objective", "all-equal",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["value"] >= 0.5
        assert abs(payload["witness_all_equal"] - payload["value"]) < 1e-12

    def test_anneal_deterministic(self, capsys):
        argv = [
            "search", "--method", "anneal", "--cardinality", "2",
            "--objective", "all-equal", "--seed", "13", "--steps", "1500",
        ]
        _, first, _ = run_cli(capsys, *argv)
        _, second, _ = run_cli(capsys, *argv)
        assert first == second


class TestAsymCommand:
    def test_payload(self, capsys):
        code, out, _ = run_cli(capsys, "asym")
        assert code == 0
        payload = json.loads(out)
        assert abs(payload["p_all_equal"] - 0.5) < 1e-12
        assert payload["zero_all_distinct_patterns"] == 20


class TestBellCheckCommand:
    def test_pr_box(self, capsys):
        code, out, _ = run_cli(capsys, "bell-check", "--target", "pr-box")
        assert code == 0
        payload = json.loads(out)
        assert payload["verdict"] == "NONLOCAL"
        assert payload["margin"] > 1e-9


class TestVerifyAllCommand:
    def test_default_tolerance_passes(self, capsys):
        code, out, err = run_cli(capsys, "verify-all", "--no-lp")
        assert code == 0
        payload = json.loads(out)
        assert payload["failed"] == 0
        assert "PASS" in err

    def test_absurd_tolerance_fails(self, capsys):
        code, out, _ = run_cli(capsys, "verify-all", "--no-lp", "--tol", "1e-20")
        assert code == 1
        payload = json.loads(out)
        assert payload["failed"] > 0


class TestUsageErrors:
    def test_unknown_command(self, capsys):
        assert main(["bogus"]) == 64

    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == 0

    def test_output_file(self, capsys, tmp_path):
        path = tmp_path / "out.json"
        code, out, _ = run_cli(capsys, "triangle", "--out", str(path))
        assert code == 0 and out == ""
        assert json.loads(path.read_text(encoding="utf-8"))["distribution"]["n"] == 3
