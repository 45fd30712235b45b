"""Tests for configuration loading."""

from __future__ import annotations

import pytest

from cotdr.config import AnalysisConfig, CotdrConfig, OutputConfig, PipelineConfig


class TestOutputConfig:
    def test_defaults(self):
        cfg = OutputConfig()
        assert cfg.out_root == "cotdr-out"
        assert cfg.archive_name == "traces.cotd"
        assert cfg.fingerprint_name == "fingerprint.csv"
        assert cfg.report_name == "summary.md"
        assert cfg.float_format == "%.9e"

    def test_frozen(self):
        cfg = OutputConfig()
        with pytest.raises(AttributeError):
            cfg.archive_name = "other.cotd"  # type: ignore[misc]


class TestAnalysisConfig:
    def test_defaults(self):
        cfg = AnalysisConfig()
        assert cfg.peak_threshold_db == 20.0
        assert cfg.median_window == 501
        assert cfg.tone_min_snr_db == 10.0
        assert cfg.snap_radius_bins == 2


class TestCotdrConfig:
    def test_defaults(self):
        cfg = CotdrConfig()
        assert isinstance(cfg.output, OutputConfig)
        assert isinstance(cfg.pipeline, PipelineConfig)
        assert isinstance(cfg.analysis, AnalysisConfig)
        assert cfg.pipeline.workers == 4

    def test_toml_path(self, tmp_path):
        cfg = CotdrConfig(config_dir=tmp_path)
        assert cfg.toml_path == tmp_path / "config.toml"

    def test_load_defaults(self, tmp_path):
        cfg = CotdrConfig.load(tmp_path)
        assert cfg.config_dir == tmp_path
        assert cfg.output.archive_name == "traces.cotd"

    def test_config_dir_from_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("COTDR_CONFIG_DIR", str(tmp_path))
        cfg = CotdrConfig.load()
        assert cfg.config_dir == tmp_path

    def test_load_from_toml(self, tmp_path):
        (tmp_path / "config.toml").write_text(
            '[output]\narchive_name = "run.cotd"\n\n'
            "[pipeline]\nworkers = 2\n\n"
            "[analysis]\nmedian_window = 101\nsnap_radius_bins = 0\n"
        )

        cfg = CotdrConfig.load(tmp_path)
        assert cfg.output.archive_name == "run.cotd"
        assert cfg.pipeline.workers == 2
        assert cfg.analysis.median_window == 101
        assert cfg.analysis.snap_radius_bins == 0

    def test_env_overrides_toml(self, tmp_path, monkeypatch):
        (tmp_path / "config.toml").write_text("[pipeline]\nworkers = 2\n")
        monkeypatch.setenv("COTDR_WORKERS", "8")

        cfg = CotdrConfig.load(tmp_path)
        assert cfg.pipeline.workers == 8

    def test_env_overrides_defaults(self, tmp_path, monkeypatch):
        monkeypatch.setenv("COTDR_PEAK_THRESHOLD_DB", "12.5")
        monkeypatch.setenv("COTDR_FLOAT_FORMAT", "%.6g")
        monkeypatch.setenv("COTDR_OUT_ROOT", "elsewhere")

        cfg = CotdrConfig.load(tmp_path)
        assert cfg.analysis.peak_threshold_db == 12.5
        assert cfg.output.float_format == "%.6g"
        assert cfg.output.out_root == "elsewhere"
