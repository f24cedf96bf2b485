"""End-to-end command behavior through main(argv), in process."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from sosage.cli import EXIT_OK, EXIT_UNSOLVED, EXIT_USAGE, EXIT_VERIFY_FAILED, main
from sosage.harness import OUTPUT_DIR_ENV, load_checkpoint, save_checkpoint


@pytest.fixture(autouse=True)
def isolated_output(monkeypatch):
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)


@pytest.fixture
def config_path(tmp_path):
    doc = {
        "seed": 0,
        "env": {"name": "xor"},
        "problem": {"problem_order_x": 2, "base_solver_order_r": 1},
        "evolution": {"network_size": 2, "assemblies_per_generation": 3, "max_generations": 4},
        "roster_size": 4,
        "population_limit": 8,
        "output_dir": str(tmp_path / "runs"),
        "checkpoint_every": 2,
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc))
    return path


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestRunCommand:
    def test_run_prints_artifact_paths(self, config_path, capsys, tmp_path):
        code, out, err = run_cli(capsys, "run", str(config_path))
        assert code == EXIT_OK
        metrics, checkpoint = out.splitlines()
        assert Path(metrics).exists() and Path(checkpoint).exists()
        assert "gen 0:" in err  # progress goes to stderr

    def test_require_solve_flags_unsolved(self, config_path, capsys):
        code, _, _ = run_cli(capsys, "run", str(config_path), "--require-solve")
        assert code == EXIT_UNSOLVED

    def test_seed_override_renames_artifacts(self, config_path, capsys):
        code, out, _ = run_cli(capsys, "run", str(config_path), "--seed", "9")
        assert code == EXIT_OK
        assert "metrics-9.csv" in out.splitlines()[0]

    def test_missing_config_is_usage_error(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "run", str(tmp_path / "nope.json"))
        assert code == EXIT_USAGE
        assert "error:" in err

    def test_invalid_config_is_usage_error(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"env": {"name": "xor"}, "turbo": 1}))
        code, _, err = run_cli(capsys, "run", str(bad))
        assert code == EXIT_USAGE
        assert "turbo" in err

    def test_usage_error_without_command(self, capsys):
        assert main([]) == EXIT_USAGE
        capsys.readouterr()


class TestResumeCommand:
    def test_resume_from_periodic_checkpoint(self, config_path, capsys, tmp_path):
        run_cli(capsys, "run", str(config_path))
        ckpt = tmp_path / "runs" / "checkpoint-0-gen2.json"
        code, out, _ = run_cli(capsys, "resume", str(ckpt))
        assert code == EXIT_OK
        assert "metrics-0-from2.csv" in out.splitlines()[0]

    def test_resume_rejects_tampered_checkpoint(self, config_path, capsys, tmp_path):
        run_cli(capsys, "run", str(config_path))
        path = tmp_path / "runs" / "checkpoint-0-gen2.json"
        doc = json.loads(path.read_text())
        doc["config"]["roster_size"] = 5
        path.write_text(json.dumps(doc))
        code, _, err = run_cli(capsys, "resume", str(path))
        assert code == EXIT_USAGE
        assert "digest" in err.lower() or "match" in err.lower()


class TestInspectCommand:
    def test_text_and_json_formats(self, config_path, capsys, tmp_path):
        run_cli(capsys, "run", str(config_path))
        ckpt = str(tmp_path / "runs" / "checkpoint-0-final.json")
        code, out, _ = run_cli(capsys, "inspect", ckpt)
        assert code == EXIT_OK and "generation: 4" in out
        code, out, _ = run_cli(capsys, "inspect", ckpt, "--format", "json")
        assert code == EXIT_OK
        assert json.loads(out)["generation"] == 4


class TestVerifyCommand:
    def test_healthy_checkpoint_passes(self, config_path, capsys, tmp_path):
        run_cli(capsys, "run", str(config_path))
        ckpt = str(tmp_path / "runs" / "checkpoint-0-final.json")
        code, out, _ = run_cli(capsys, "verify", ckpt)
        assert code == EXIT_OK
        lines = out.splitlines()
        assert len(lines) == 12
        assert all(line.startswith("pass") for line in lines)

    def test_corrupted_checkpoint_fails(self, config_path, capsys, tmp_path):
        run_cli(capsys, "run", str(config_path))
        path = tmp_path / "runs" / "checkpoint-0-final.json"
        ckpt = load_checkpoint(path)
        ckpt.state.pop.members.append(31337)
        save_checkpoint(path, ckpt)
        code, out, _ = run_cli(capsys, "verify", str(path))
        assert code == EXIT_VERIFY_FAILED
        assert any(line.startswith("FAIL  roster-membership") for line in out.splitlines())


class TestSweepCommand:
    def test_sweep_prints_summary_path(self, config_path, capsys, tmp_path):
        code, out, _ = run_cli(capsys, "sweep", str(config_path), "--seeds", "2")
        assert code == EXIT_OK
        summary = Path(out.strip().splitlines()[-1])
        assert summary.name == "sweep-summary.csv"
        assert len(summary.read_text().splitlines()) == 3

    def test_sweep_require_solve(self, config_path, capsys):
        code, _, _ = run_cli(capsys, "sweep", str(config_path), "--seeds", "2", "--require-solve")
        assert code == EXIT_UNSOLVED
