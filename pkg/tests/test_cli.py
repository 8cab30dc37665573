"""Command-line behaviour: subcommands, formats, exit codes, determinism."""

import json

import pytest

from entrocone.analysis import verify_line_tightness
from entrocone.causal import build_line_structure
from entrocone.cli import main
from entrocone.distributions import model_to_json, witness_line
from entrocone.polyhedra import rep_to_json, HRep, VRep

from reference_tables import LINE4_RAYS


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestOuter:
    def test_line4_text(self, capsys):
        code, out, _ = run_cli(capsys, "outer", "pn:4")
        assert code == 0
        assert "verdict: outer-only" in out
        for ray in LINE4_RAYS.values():
            assert " ".join(str(v) for v in ray) in out

    def test_json_format(self, capsys):
        code, out, _ = run_cli(capsys, "--format", "json", "outer", "pn:2")
        assert code == 0
        data = json.loads(out)
        assert data["structure"] == "pn:2"
        assert len(data["rays"]) == 3

    def test_structure_file(self, tmp_path, capsys):
        path = tmp_path / "line2.json"
        path.write_text(build_line_structure(2).to_json())
        code, out, _ = run_cli(capsys, "outer", str(path))
        assert code == 0
        assert "extremal rays (3)" in out

    def test_unknown_structure(self, capsys):
        code, _, err = run_cli(capsys, "outer", "pn:zero")
        assert code == 1
        assert "neither a built-in structure name nor an existing file" in err


class TestVerify:
    def test_line4_tight_exit_zero(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "pn:4")
        assert code == 0
        assert "verdict: tight" in out
        assert out.count("<- witness") == 10

    def test_requires_line_selector(self, capsys):
        code, _, err = run_cli(capsys, "verify", "bell")
        assert code == 1
        assert "pn:<n>" in err

    def test_thin_adapter_matches_library(self, capsys):
        code, out, _ = run_cli(capsys, "--format", "json", "verify", "pn:3")
        data = json.loads(out)
        report = verify_line_tightness(3)
        assert data["verdict"] == report.verdict
        assert [tuple(r) for r in data["rays"].values()] == list(report.rays)

    def test_outer_only_verdict_exits_two(self, capsys, monkeypatch):
        import entrocone.analysis as analysis_mod

        def fake_verify(n, tolerance=1e-9):
            report = verify_line_tightness(n)
            report.verdict = "outer-only"
            return report

        monkeypatch.setattr(analysis_mod, "verify_line_tightness", fake_verify)
        code, out, _ = run_cli(capsys, "verify", "pn:2")
        assert code == 2
        assert "verdict: outer-only" in out


class TestMarginalize:
    def test_bell_dd(self, capsys):
        code, out, _ = run_cli(capsys, "--engine", "dd", "marginalize", "bell")
        assert code == 0
        for ray in LINE4_RAYS.values():
            assert " ".join(str(v) for v in ray) in out

    def test_guard_message_names_flag(self, capsys):
        code, _, err = run_cli(capsys, "marginalize", "pn:4")
        assert code == 1
        assert "--max-nodes" in err

    def test_guard_override_flag(self, capsys):
        code, out, _ = run_cli(capsys, "--max-nodes", "7", "--engine", "dd",
                               "marginalize", "pn:3")
        assert code == 0
        assert "extremal rays" in out


class TestBcCommands:
    def test_bc_cone_3(self, capsys):
        code, out, _ = run_cli(capsys, "bc-cone", "3")
        assert code == 0
        assert "extremal rays (20)" in out
        assert "non-Shannon members incl. equalities: 36" in out

    def test_bc_eval(self, tmp_path, capsys):
        tables = {
            "alphabets": [2, 2],
            "tables": {
                "00": [[0.5, 0.0], [0.0, 0.5]],
                "01": [[0.25, 0.25], [0.25, 0.25]],
                "10": [[0.25, 0.25], [0.25, 0.25]],
                "11": [[0.25, 0.25], [0.25, 0.25]],
            },
        }
        path = tmp_path / "tables.json"
        path.write_text(json.dumps(tables))
        code, out, _ = run_cli(capsys, "bc-eval", str(path))
        assert code == 0
        assert out.strip() == "3"

    def test_bc_eval_all_deterministic_zero(self, tmp_path, capsys):
        det = [[1.0, 0.0], [0.0, 0.0]]
        tables = {"alphabets": [2, 2],
                  "tables": {k: det for k in ("00", "01", "10", "11")}}
        path = tmp_path / "tables.json"
        path.write_text(json.dumps(tables))
        code, out, _ = run_cli(capsys, "bc-eval", str(path))
        assert code == 0
        assert out.strip() == "0"

    def test_bc_eval_diagnostic(self, tmp_path, capsys):
        path = tmp_path / "tables.json"
        path.write_text('{"alphabets": [2, 2], "tables": {"00": [[1.0,0.0],[0.0,0.0]]}}')
        code, _, err = run_cli(capsys, "bc-eval", str(path))
        assert code == 1
        assert "tables.01" in err


class TestEntropyCommand:
    def test_witness_entropy(self, tmp_path, capsys):
        path = tmp_path / "model.json"
        path.write_text(model_to_json(witness_line(1, 2, 2)))
        code, out, _ = run_cli(capsys, "entropy", str(path))
        assert code == 0
        assert "H(X1) = 1" in out
        assert "H(X1X2) = 1" in out

    def test_json_output(self, tmp_path, capsys):
        path = tmp_path / "model.json"
        path.write_text(model_to_json(witness_line(1, 1, 2)))
        code, out, _ = run_cli(capsys, "--format", "json", "entropy", str(path))
        data = json.loads(out)
        assert data["H(X1)"] == pytest.approx(1.0)

    def test_malformed_model_diagnostic(self, tmp_path, capsys):
        path = tmp_path / "model.json"
        path.write_text('{"structure": "pn:2", "alphabets": {"X1": 2}}')
        code, _, err = run_cli(capsys, "entropy", str(path))
        assert code == 1
        assert "cpts" in err

    def test_inline_structure_model(self, tmp_path, capsys):
        model = {
            "structure": {"nodes": [{"id": "U", "kind": "observed"}], "edges": []},
            "alphabets": {"U": 4},
            "cpts": {"U": [0.25, 0.25, 0.25, 0.25]},
        }
        path = tmp_path / "model.json"
        path.write_text(json.dumps(model))
        code, out, _ = run_cli(capsys, "entropy", str(path))
        assert code == 0
        assert "H(U) = 2" in out


class TestConversionCommands:
    def test_rays_from_hrep_file(self, tmp_path, capsys):
        path = tmp_path / "cone.json"
        path.write_text(rep_to_json(HRep(2, inequalities=((1, 0), (0, 1)))))
        code, out, _ = run_cli(capsys, "rays", str(path))
        assert code == 0
        assert "CONE_SECTION" in out

    def test_facets_from_vrep_file(self, tmp_path, capsys):
        path = tmp_path / "cone.json"
        path.write_text(rep_to_json(VRep(2, rays=((1, 0), (0, 1)))))
        code, out, _ = run_cli(capsys, "facets", str(path))
        assert code == 0
        assert "INEQUALITIES_SECTION" in out

    def test_wrong_kind_rejected(self, tmp_path, capsys):
        path = tmp_path / "cone.json"
        path.write_text(rep_to_json(VRep(2, rays=((1, 0),))))
        code, _, err = run_cli(capsys, "rays", str(path))
        assert code == 1
        assert "hrep" in err


class TestCliContract:
    def test_unknown_flag_rejected(self, capsys):
        code, _, err = run_cli(capsys, "--frobnicate", "outer", "pn:2")
        assert code == 1

    def test_missing_file(self, capsys):
        code, _, err = run_cli(capsys, "bc-eval", "/nonexistent/tables.json")
        assert code == 1

    def test_byte_identical_runs(self, capsys):
        _, out1, _ = run_cli(capsys, "--format", "json", "outer", "pn:3")
        _, out2, _ = run_cli(capsys, "--format", "json", "outer", "pn:3")
        assert out1 == out2
        _, t1, _ = run_cli(capsys, "verify", "pn:4")
        _, t2, _ = run_cli(capsys, "verify", "pn:4")
        assert t1 == t2

    def test_verbose_timing_on_stderr_only(self, capsys):
        _, out, err = run_cli(capsys, "--verbose", "outer", "pn:2")
        assert "[timing]" in err
        assert "[timing]" not in out
