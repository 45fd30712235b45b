"""Layered configuration: .cotdr/config.toml -> COTDR_* env vars -> defaults."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib  # type: ignore[no-redef]


def _default_config_dir() -> Path:
    """Return the default configuration directory.

    Resolution order:
      1. $COTDR_CONFIG_DIR (explicit override)
      2. ./.cotdr in the working directory
    """
    env_dir = os.environ.get("COTDR_CONFIG_DIR")
    if env_dir:
        return Path(env_dir)
    return Path.cwd() / ".cotdr"


@dataclass(frozen=True, slots=True)
class OutputConfig:
    """Names and number formatting of run artifacts."""

    out_root: str = "cotdr-out"
    archive_name: str = "traces.cotd"
    fingerprint_name: str = "fingerprint.csv"
    report_name: str = "summary.md"
    float_format: str = "%.9e"


@dataclass(frozen=True, slots=True)
class PipelineConfig:
    """Frame synthesis worker pool."""

    workers: int = 4


@dataclass(frozen=True, slots=True)
class AnalysisConfig:
    """Defaults for peak search, tone detection and point selection."""

    peak_threshold_db: float = 20.0
    median_window: int = 501
    tone_min_snr_db: float = 10.0
    snap_radius_bins: int = 2
    fbg_fit_window_db: float = 10.0


@dataclass(frozen=True, slots=True)
class CotdrConfig:
    """Top-level configuration container."""

    config_dir: Path = field(default_factory=_default_config_dir)
    output: OutputConfig = field(default_factory=OutputConfig)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)

    @property
    def toml_path(self) -> Path:
        """Location of the optional TOML file."""
        return self.config_dir / "config.toml"

    @classmethod
    def load(cls, config_dir: Path | None = None) -> CotdrConfig:
        """Load config: TOML file -> env vars -> defaults."""
        resolved_dir = Path(config_dir) if config_dir else _default_config_dir()
        toml_path = resolved_dir / "config.toml"

        toml_data: dict[str, Any] = {}
        if toml_path.is_file():
            with open(toml_path, "rb") as f:
                toml_data = tomllib.load(f)

        output_data = toml_data.get("output", {})
        pipeline_data = toml_data.get("pipeline", {})
        analysis_data = toml_data.get("analysis", {})

        _output_defaults = OutputConfig()
        _pipeline_defaults = PipelineConfig()
        _analysis_defaults = AnalysisConfig()

        output = OutputConfig(
            out_root=os.environ.get(
                "COTDR_OUT_ROOT", output_data.get("out_root", _output_defaults.out_root)
            ),
            archive_name=output_data.get("archive_name", _output_defaults.archive_name),
            fingerprint_name=output_data.get(
                "fingerprint_name", _output_defaults.fingerprint_name
            ),
            report_name=output_data.get("report_name", _output_defaults.report_name),
            float_format=os.environ.get(
                "COTDR_FLOAT_FORMAT",
                output_data.get("float_format", _output_defaults.float_format),
            ),
        )

        pipeline = PipelineConfig(
            workers=int(
                os.environ.get(
                    "COTDR_WORKERS",
                    pipeline_data.get("workers", _pipeline_defaults.workers),
                )
            ),
        )

        analysis = AnalysisConfig(
            peak_threshold_db=float(
                os.environ.get(
                    "COTDR_PEAK_THRESHOLD_DB",
                    analysis_data.get("peak_threshold_db", _analysis_defaults.peak_threshold_db),
                )
            ),
            median_window=int(
                os.environ.get(
                    "COTDR_MEDIAN_WINDOW",
                    analysis_data.get("median_window", _analysis_defaults.median_window),
                )
            ),
            tone_min_snr_db=float(
                os.environ.get(
                    "COTDR_TONE_MIN_SNR_DB",
                    analysis_data.get("tone_min_snr_db", _analysis_defaults.tone_min_snr_db),
                )
            ),
            snap_radius_bins=int(
                analysis_data.get("snap_radius_bins", _analysis_defaults.snap_radius_bins)
            ),
            fbg_fit_window_db=float(
                analysis_data.get("fbg_fit_window_db", _analysis_defaults.fbg_fit_window_db)
            ),
        )

        return cls(config_dir=resolved_dir, output=output, pipeline=pipeline, analysis=analysis)
