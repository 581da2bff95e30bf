"""Tests for experiment configuration loading and overrides."""

import json

import pytest

from pbarrier.config import (
    DEFAULT_OUTPUT_DIR,
    OUTPUT_DIR_ENV,
    ExperimentConfig,
    build_config,
    load_config,
    merge_overrides,
    read_config_file,
    resolve_output_dir,
    save_config,
)
from pbarrier.core import ParameterError


@pytest.fixture
def base_document():
    return {
        "command": "verify-barrier",
        "params": {"p": 3.0, "n": 1},
        "family": {"kind": "petrovskii", "alpha": 1.0, "K": 1.0},
    }


class TestBuildConfig:
    """Test validation of config documents."""

    def test_defaults(self, base_document):
        config = build_config(base_document)
        assert config.j == "auto"
        assert config.sampling.samples == 10_000
        assert config.sampling.tol == 1e-8
        assert config.grid.h == pytest.approx(1.0 / 32)
        assert config.scaling.a == 8.0
        assert config.comparison.pairs == 20
        assert config.family.kind == "petrovskii"

    def test_overrides_win(self, base_document):
        config = build_config(base_document, {"sampling": {"samples": 50}, "params": {"n": 2}})
        assert config.sampling.samples == 50
        assert config.params.n == 2
        assert config.params.p == 3.0

    def test_invalid_document(self, base_document):
        base_document["params"]["p"] = 0.5
        with pytest.raises(ParameterError, match="invalid experiment config"):
            build_config(base_document)

    def test_unknown_section_is_rejected(self, base_document):
        base_document["sampler"] = {}
        with pytest.raises(ParameterError):
            build_config(base_document)

    def test_sense_code(self, base_document):
        config = build_config(base_document)
        assert config.sense_code("super") == "super"
        config = build_config(base_document, {"sampling": {"sense": "subsolution"}})
        assert config.sense_code("super") == "sub"


class TestMergeOverrides:
    """Test the recursive overlay of command-line values."""

    def test_none_leaves_base(self):
        merged = merge_overrides({"j": 3, "grid": {"h": 0.1}}, {"j": None, "grid": {"h": None}})
        assert merged == {"j": 3, "grid": {"h": 0.1}}

    def test_nested_merge(self):
        merged = merge_overrides({"grid": {"h": 0.1, "levels": 4}}, {"grid": {"levels": 8}})
        assert merged == {"grid": {"h": 0.1, "levels": 8}}

    def test_base_is_not_mutated(self):
        base = {"grid": {"h": 0.1}}
        merge_overrides(base, {"grid": {"h": 0.2}})
        assert base == {"grid": {"h": 0.1}}


class TestConfigFiles:
    """Test reading and writing config files."""

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParameterError, match="not found"):
            read_config_file(tmp_path / "absent.json")

    def test_bad_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ParameterError, match="not valid JSON"):
            read_config_file(path)

    def test_non_object(self, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[1, 2]", encoding="utf-8")
        with pytest.raises(ParameterError, match="JSON object"):
            read_config_file(path)

    def test_save_and_load(self, base_document, tmp_path):
        config = build_config(base_document, {"j": 5})
        path = save_config(config, tmp_path / "cfg" / "experiment.json")

        loaded = load_config(path)
        assert loaded.j == 5
        assert loaded.config_checksum() == config.config_checksum()
        assert json.loads(path.read_text(encoding="utf-8"))["j"] == 5


class TestChecksum:
    """Test the config checksum."""

    def test_stable(self, base_document):
        assert build_config(base_document).config_checksum() == build_config(base_document).config_checksum()

    def test_ignores_output_dir(self, base_document):
        plain = build_config(base_document)
        moved = build_config(base_document, {"output_dir": "/tmp/elsewhere"})
        assert plain.config_checksum() == moved.config_checksum()

    def test_changes_with_experiment(self, base_document):
        plain = build_config(base_document)
        other = build_config(base_document, {"sampling": {"seed": 1}})
        assert plain.config_checksum() != other.config_checksum()
        assert len(plain.config_checksum()) == 64


class TestOutputDir:
    """Test output directory resolution."""

    def test_explicit_wins(self, monkeypatch, tmp_path):
        monkeypatch.setenv(OUTPUT_DIR_ENV, "/from/env")
        assert resolve_output_dir(tmp_path) == tmp_path

    def test_environment(self, monkeypatch):
        monkeypatch.setenv(OUTPUT_DIR_ENV, "/from/env")
        assert str(resolve_output_dir()) == "/from/env"

    def test_default(self, monkeypatch):
        monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
        assert str(resolve_output_dir()) == DEFAULT_OUTPUT_DIR

    def test_config_uses_resolution(self, base_document, tmp_path):
        config = ExperimentConfig.model_validate({**base_document, "output_dir": str(tmp_path)})
        assert config.resolved_output_dir() == tmp_path
