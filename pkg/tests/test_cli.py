"""
Tests for the command-line entry point.
"""
import json

import pandas as pd
import pytest

from guarded_decoding.cli import build_parser, main, parse_sweep, resolve_options, spec_from_options

from .helpers import small_detox


class TestParsing:
    """Test option parsing and merging."""

    def test_parse_sweep(self):
        """Test PARAM=V1,V2 splitting."""
        assert parse_sweep("thrv=0.3,0.5") == ("thrv", ["0.3", "0.5"])
        assert parse_sweep("max-tokens=10, 20") == ("max_tokens", ["10", "20"])

    @pytest.mark.parametrize("text", ["thrv", "thrv=", "beam=1,2"])
    def test_parse_sweep_errors(self, text):
        """Test malformed sweeps."""
        with pytest.raises(ValueError):
            parse_sweep(text)

    def test_defaults(self):
        """Test unset flags fall back to the defaults."""
        options = resolve_options(build_parser().parse_args([]))
        assert options["beam_size"] == 3
        assert options["schedule"] == "contextwise"
        assert options["lam"] == 200.0

    def test_flags_override_config(self, tmp_path):
        """Test precedence: flag, then config file, then default."""
        config = tmp_path / "experiment.json"
        config.write_text(json.dumps({"thrv": 0.5, "lambda": 100, "reps": 2}))
        args = build_parser().parse_args(["--config", str(config), "--thrv", "0.4"])
        options = resolve_options(args)
        assert options["thrv"] == 0.4
        assert options["lam"] == 100.0
        assert options["reps"] == 2
        assert options["max_tokens"] == 20

    def test_spec_requires_inputs(self):
        """Test corpus and prompts are mandatory."""
        options = resolve_options(build_parser().parse_args([]))
        with pytest.raises(ValueError):
            spec_from_options(options)

    def test_spec_from_flags(self, tmp_path):
        """Test flags reach the search configuration."""
        paths = small_detox(tmp_path, n_prompts=2)
        args = build_parser().parse_args([
            "--corpus", str(paths["corpus"]), "--prompts", str(paths["prompts"]),
            "--beam-size", "2", "--schedule", "stepk:4", "--lambda", "80",
            "--sched-agg", "maxmax", "--no-cluster", "--rollback-budget", "3",
        ])
        spec = spec_from_options(resolve_options(args))
        assert spec.guard.beam_K == 2
        assert spec.guard.schedule.label == "stepk:4"
        assert spec.guard.schedule.lam == 80.0
        assert spec.guard.schedule.aggregation.value == "maxmax"
        assert not spec.guard.store.do_clustering
        assert spec.guard.rollback_budget == 3


class TestMain:
    """Test end-to-end command-line runs."""

    @pytest.fixture
    def paths(self, tmp_path):
        """Detox fixture files with three prompts."""
        return small_detox(tmp_path / "data", n_prompts=3)

    def base_args(self, paths):
        return [
            "--corpus", str(paths["corpus"]), "--prompts", str(paths["prompts"]),
            "--examples", str(paths["examples"]), "--reps", "1", "--max-tokens", "8",
            "--beam-size", "2", "--embed-dim", "1024", "--log-level", "WARNING",
        ]

    def test_fixture(self, tmp_path, capsys):
        """Test writing the shipped fixtures."""
        assert main(["--fixture", "copyright", str(tmp_path / "cr")]) == 0
        assert (tmp_path / "cr" / "prompts.jsonl").exists()
        assert "prompts:" in capsys.readouterr().out

    def test_run(self, paths, tmp_path, capsys):
        """Test a run writes its reports."""
        out = tmp_path / "out"
        assert main(self.base_args(paths) + ["--out", str(out)]) == 0
        document = json.loads((out / "report.json").read_text())
        assert document["config"]["max_token"] == 8
        assert len(document["prompts"]) == 3
        assert (out / "report.csv").exists()
        assert len(list((out / "per_prompt").iterdir())) == 3
        assert "Reports written to" in capsys.readouterr().out

    def test_sweep(self, paths, tmp_path):
        """Test a sweep writes one row per value."""
        out = tmp_path / "sweep"
        assert main(self.base_args(paths) + ["--out", str(out), "--sweep", "thrv=0.3,0.5"]) == 0
        frame = pd.read_csv(out / "sweep.csv")
        assert frame["value"].tolist() == [0.3, 0.5]
        assert (out / "thrv=0.5" / "report.json").exists()

    def test_config_file(self, paths, tmp_path):
        """Test running from a config file with a flag override."""
        config = tmp_path / "experiment.json"
        config.write_text(json.dumps({
            "corpus": [str(paths["corpus"])],
            "prompts": str(paths["prompts"]),
            "reps": 1,
            "max_tokens": 5,
            "schedule": "step1",
        }))
        out = tmp_path / "out"
        assert main(["--config", str(config), "--max-tokens", "4", "--out", str(out),
                     "--log-level", "WARNING"]) == 0
        document = json.loads((out / "report.json").read_text())
        assert document["config"]["max_token"] == 4
        assert document["config"]["schedule"] == "step1"

    @pytest.mark.parametrize("extra", [
        ["--thrv", "1.5"],
        ["--schedule", "weekly"],
        ["--sweep", "beam=1,2"],
    ])
    def test_invalid_options_exit_with_one(self, paths, extra):
        """Test invalid settings are reported, not raised."""
        assert main(self.base_args(paths) + extra) == 1

    def test_missing_corpus(self):
        """Test a run without inputs fails cleanly."""
        assert main(["--log-level", "WARNING"]) == 1

    def test_unknown_config_key(self, tmp_path):
        """Test config files are checked."""
        config = tmp_path / "experiment.json"
        config.write_text(json.dumps({"beams": 3}))
        assert main(["--config", str(config), "--log-level", "WARNING"]) == 1

    def test_missing_file(self, paths, tmp_path):
        """Test unreadable inputs."""
        args = self.base_args(paths)
        args[args.index("--examples") + 1] = str(tmp_path / "absent.jsonl")
        assert main(args) == 1

    def test_unknown_log_level(self):
        """Test the log level is validated by the parser."""
        with pytest.raises(SystemExit):
            main(["--log-level", "LOUD"])
