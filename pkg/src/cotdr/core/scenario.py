"""Scenario documents: loading, bundled library and validation.

Scenarios are JSON (or YAML) objects with ``probe``, ``fiber``,
``detection``, ``perturbations`` and ``analyses`` sections. Problems are
reported as :class:`Diagnostic` records carrying the dotted location of the
offending field and, when the document can be mapped, its line number.
"""

from __future__ import annotations

import json
import logging
import math
from collections.abc import Callable, Mapping
from dataclasses import MISSING, fields
from importlib import resources
from pathlib import Path
from typing import Any, TypeVar

import yaml
from scipy.constants import c as SPEED_OF_LIGHT

from cotdr.core.fibermodel import one_way_phase
from cotdr.models.enums import (
    AnalysisKind,
    DetectionMode,
    FitMethod,
    Modulation,
    PerturbationKind,
    ReflectorClass,
    Severity,
)
from cotdr.models.signals import Diagnostic
from cotdr.models.specs import (
    AnalysisDirective,
    DetectionConfig,
    FbgScenario,
    FiberSpec,
    Perturbation,
    ProbeSpec,
    Reflector,
    Scenario,
)

logger = logging.getLogger(__name__)

BUNDLED_PACKAGE = "cotdr.scenarios"

# Alternate names the bundled scenarios answer to.
BUNDLED_ALIASES = {
    "fig2_fingerprint": "connector_fingerprint",
    "fig3_rtt": "span_rtt",
    "fig5_phase": "acoustic_phase",
}

T = TypeVar("T")
Converter = Callable[[Any], Any]


# --- bundled library -------------------------------------------------------


def bundled_scenarios() -> list[str]:
    """Names of the scenarios shipped with the package."""
    root = resources.files(BUNDLED_PACKAGE)
    return sorted(
        entry.name.removesuffix(".json")
        for entry in root.iterdir()
        if entry.name.endswith(".json")
    )


def _read_source(ref: str | Path) -> tuple[str, str, str]:
    """Text, display name and suffix of a scenario path or bundled name."""
    path = Path(ref)
    if path.is_file():
        return path.read_text(encoding="utf-8"), path.stem, path.suffix.lower()
    name = BUNDLED_ALIASES.get(str(ref), str(ref))
    if name in bundled_scenarios():
        text = resources.files(BUNDLED_PACKAGE).joinpath(f"{name}.json").read_text("utf-8")
        return text, name, ".json"
    raise FileNotFoundError(f"no scenario file or bundled scenario named '{ref}'")


# --- line mapping ----------------------------------------------------------


def _line_map(text: str) -> dict[str, int]:
    """Dotted path -> 1-based line of every node in the document."""
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return {}
    lines: dict[str, int] = {}

    def walk(node: yaml.Node, path: str) -> None:
        lines[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            for key, value in node.value:
                child = f"{path}.{key.value}" if path else str(key.value)
                walk(value, child)
                lines[child] = key.start_mark.line + 1
        elif isinstance(node, yaml.SequenceNode):
            for i, item in enumerate(node.value):
                walk(item, f"{path}[{i}]")

    if root is not None:
        walk(root, "")
    return lines


class _Collector:
    """Accumulates diagnostics with line numbers resolved from the document."""

    def __init__(self, lines: Mapping[str, int]) -> None:
        self.lines = lines
        self.diagnostics: list[Diagnostic] = []

    def _line(self, location: str) -> int | None:
        path = location
        while path:
            if path in self.lines:
                return self.lines[path]
            cut = max(path.rfind("."), path.rfind("["))
            path = path[:cut] if cut > 0 else ""
        return self.lines.get("")

    def error(self, location: str, message: str) -> None:
        self.diagnostics.append(
            Diagnostic(Severity.ERROR, location, message, self._line(location))
        )

    def warning(self, location: str, message: str) -> None:
        self.diagnostics.append(
            Diagnostic(Severity.WARNING, location, message, self._line(location))
        )

    @property
    def failed(self) -> bool:
        return any(d.severity is Severity.ERROR for d in self.diagnostics)


# --- field converters ------------------------------------------------------


def _float(value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise TypeError(f"expected a number, got {type(value).__name__}")
    result = float(value)
    if not math.isfinite(result):
        raise ValueError("expected a finite number")
    return result


def _int(value: Any) -> int:
    number = _float(value)
    if not number.is_integer():
        raise ValueError("expected an integer")
    return int(number)


def _seed(value: Any) -> int:
    number = value if isinstance(value, int) and not isinstance(value, bool) else _int(value)
    if not 0 <= number < 2**64:
        raise ValueError("seed must be a non-negative 64-bit integer")
    return number


def _bool(value: Any) -> bool:
    if not isinstance(value, bool):
        raise TypeError(f"expected true or false, got {value!r}")
    return value


def _str(value: Any) -> str:
    if not isinstance(value, str):
        raise TypeError(f"expected a string, got {type(value).__name__}")
    return value


def _optional(convert: Converter) -> Converter:
    return lambda value: None if value is None else convert(value)


def _tuple_of(convert: Converter) -> Converter:
    def run(value: Any) -> tuple[Any, ...]:
        if not isinstance(value, list):
            raise TypeError(f"expected a list, got {type(value).__name__}")
        return tuple(convert(v) for v in value)

    return run


def _pair(value: Any) -> tuple[float, float]:
    pair = _tuple_of(_float)(value)
    if len(pair) != 2 or pair[0] > pair[1]:
        raise ValueError("expected [low, high]")
    return (pair[0], pair[1])


_PROBE: dict[str, Converter] = {
    "prbs_order": _int,
    "extended": _bool,
    "modulation": Modulation,
    "bit_rate": _float,
    "samples_per_bit": _int,
    "wavelength": _float,
    "frame_period": _float,
    "seed": _optional(_tuple_of(_int)),
}
_FIBER: dict[str, Converter] = {
    "length": _float,
    "attenuation": _float,
    "group_index": _float,
    "backscatter_coeff": _optional(_float),
    "scatterer_spacing": _optional(_float),
    "thermal_coeff": _float,
    "rng_seed": _seed,
}
_DETECTION: dict[str, Converter] = {
    "mode": DetectionMode,
    "thermal_noise_sigma": _float,
    "lo_linewidth": _float,
    "lo_power_gain": _float,
    "adc_bits": _optional(_int),
    "adc_full_scale": _float,
    "num_averages": _int,
}
_PERTURBATION: dict[str, Converter] = {
    "kind": PerturbationKind,
    "center": _float,
    "extent": _float,
    "frequency": _float,
    "index_amplitude": _float,
    "delta_t": _float,
    "onset": _float,
    "series": _tuple_of(_float),
    "series_dt": _float,
    "lag_tau": _optional(_float),
}
_FBG: dict[str, Converter] = {
    "num_gratings": _int,
    "spacing": _float,
    "sweep_start": _float,
    "sweep_stop": _float,
    "sweep_step": _float,
    "first_position": _float,
    "center_wavelengths": _tuple_of(_float),
    "nominal_wavelength": _float,
    "detuning_amplitude": _float,
    "detuning_period": _float,
    "fwhm": _float,
    "peak_return_loss": _float,
}
_ANALYSIS: dict[str, Converter] = {
    "kind": AnalysisKind,
    "label": _str,
    "positions": _tuple_of(_float),
    "fit": FitMethod,
    "threshold_db": _optional(_float),
    "f_min": _optional(_float),
    "f_max": _optional(_float),
    "target": _optional(_str),
    "fiber_km": _optional(_float),
    "bounds": _optional(_pair),
}
_TOP: dict[str, Converter] = {
    "name": _str,
    "description": _str,
    "seed": _seed,
    "frames": _int,
    "frame_rate": _float,
}
_SECTIONS = ("probe", "fiber", "detection", "perturbations", "analyses")


def _section(
    out: _Collector,
    cls: type[T],
    data: Any,
    location: str,
    converters: Mapping[str, Converter],
    nested: Mapping[str, Any] | None = None,
    nested_keys: tuple[str, ...] = (),
) -> T | None:
    """Convert one object of the document into ``cls``; None after reporting."""
    if not isinstance(data, dict):
        out.error(location, "expected an object")
        return None

    kwargs: dict[str, Any] = dict(nested or {})
    ok = True
    for key, value in data.items():
        if key in nested_keys:
            continue
        convert = converters.get(key)
        if convert is None:
            out.error(f"{location}.{key}", "unknown field")
            ok = False
            continue
        try:
            kwargs[key] = convert(value)
        except (TypeError, ValueError) as exc:
            out.error(f"{location}.{key}", f"invalid value {value!r}: {exc}")
            ok = False

    for f in fields(cls):  # type: ignore[arg-type]
        if f.default is MISSING and f.default_factory is MISSING and f.name not in kwargs:
            if f.name not in data:
                out.error(location, f"missing required field '{f.name}'")
                ok = False
    if not ok:
        return None
    try:
        return cls(**kwargs)
    except ValueError as exc:
        out.error(location, str(exc))
        return None


def _reflector(out: _Collector, data: Any, location: str) -> Reflector | None:
    if not isinstance(data, dict):
        out.error(location, "expected an object")
        return None
    unknown = set(data) - {"position", "return_loss", "class"}
    for key in sorted(unknown):
        out.error(f"{location}.{key}", "unknown field")
    if unknown:
        return None
    try:
        position = _float(data["position"])
        if "return_loss" in data:
            return Reflector(position=position, return_loss=_float(data["return_loss"]))
        if "class" in data:
            return Reflector.of_class(position, ReflectorClass(data["class"]))
        out.error(location, "reflector needs 'return_loss' or 'class'")
    except KeyError:
        out.error(location, "missing required field 'position'")
    except (TypeError, ValueError) as exc:
        out.error(location, str(exc))
    return None


def _list(out: _Collector, data: Any, location: str) -> list[Any]:
    if data is None:
        return []
    if not isinstance(data, list):
        out.error(location, "expected a list")
        return []
    return data


def _build(doc: Any, name: str, out: _Collector) -> Scenario | None:
    if not isinstance(doc, dict):
        out.error("", "scenario document must be an object")
        return None
    for key in doc:
        if key not in _TOP and key not in _SECTIONS:
            out.error(key, "unknown field")

    probe = _section(out, ProbeSpec, doc.get("probe", {}), "probe", _PROBE)

    fiber_doc = doc.get("fiber")
    reflectors: list[Reflector | None] = []
    if isinstance(fiber_doc, dict):
        for i, item in enumerate(_list(out, fiber_doc.get("reflectors"), "fiber.reflectors")):
            reflectors.append(_reflector(out, item, f"fiber.reflectors[{i}]"))
    fiber = None
    if fiber_doc is None:
        out.error("fiber", "missing required section 'fiber'")
    elif None not in reflectors:
        fiber = _section(
            out,
            FiberSpec,
            fiber_doc,
            "fiber",
            _FIBER,
            nested={"reflectors": tuple(reflectors)},
            nested_keys=("reflectors",),
        )

    detection = _section(out, DetectionConfig, doc.get("detection", {}), "detection", _DETECTION)

    perturbations = [
        _section(out, Perturbation, item, f"perturbations[{i}]", _PERTURBATION)
        for i, item in enumerate(_list(out, doc.get("perturbations"), "perturbations"))
    ]

    analyses: list[AnalysisDirective | None] = []
    for i, item in enumerate(_list(out, doc.get("analyses"), "analyses")):
        location = f"analyses[{i}]"
        nested: dict[str, Any] = {}
        if isinstance(item, dict) and "fbg" in item:
            fbg = _section(out, FbgScenario, item["fbg"], f"{location}.fbg", _FBG)
            if fbg is None:
                analyses.append(None)
                continue
            nested["fbg"] = fbg
        analyses.append(
            _section(
                out, AnalysisDirective, item, location, _ANALYSIS, nested, nested_keys=("fbg",)
            )
        )

    top: dict[str, Any] = {"name": name}
    for key, convert in _TOP.items():
        if key in doc:
            try:
                top[key] = convert(doc[key])
            except (TypeError, ValueError) as exc:
                out.error(key, f"invalid value {doc[key]!r}: {exc}")
    for key in ("frames", "frame_rate"):
        if key not in doc:
            out.error(key, f"missing required field '{key}'")

    if out.failed or probe is None or fiber is None or detection is None:
        return None
    if None in perturbations or None in analyses:
        return None
    try:
        return Scenario(
            probe=probe,
            fiber=fiber,
            detection=detection,
            perturbations=tuple(p for p in perturbations if p is not None),
            analyses=tuple(a for a in analyses if a is not None),
            **top,
        )
    except ValueError as exc:
        out.error("", str(exc))
        return None


# --- cross-field checks ----------------------------------------------------


def _max_round_trip(length: float, group_index: float) -> float:
    return 2.0 * group_index * length / SPEED_OF_LIGHT


def _frame_samples_needed(probe: ProbeSpec, round_trip: float) -> int:
    return probe.sequence_length * probe.samples_per_bit + math.ceil(
        round_trip * probe.sample_rate
    ) + 2


def _check(s: Scenario, out: _Collector) -> None:
    probe, fiber = s.probe, s.fiber

    if s.detection.mode is DetectionMode.DIRECT and probe.modulation is Modulation.BPSK:
        out.error("detection.mode", "direct detection cannot recover a BPSK probe")

    needed = _frame_samples_needed(probe, _max_round_trip(fiber.length, fiber.group_index))
    if probe.frame_length < needed:
        out.error(
            "probe.frame_period",
            f"frame_period {probe.frame_period:.6g} s is shorter than the sequence "
            f"duration plus the round trip ({needed / probe.sample_rate:.6g} s)",
        )
    if 1.0 / s.frame_rate < probe.frame_period:
        out.error(
            "frame_rate",
            f"frame interval {1.0 / s.frame_rate:.6g} s is shorter than "
            f"frame_period {probe.frame_period:.6g} s",
        )

    if len(fiber.reflectors) > 1:
        delays = sorted(_max_round_trip(r.position, fiber.group_index) for r in fiber.reflectors)
        closest = min(b - a for a, b in zip(delays, delays[1:]))
        if 1.0 / probe.sample_rate > closest:
            out.warning(
                "fiber.reflectors",
                f"sample period {1.0 / probe.sample_rate:.3g} s exceeds the closest "
                f"reflector separation {closest:.3g} s; peaks will merge",
            )

    for i, p in enumerate(s.perturbations):
        location = f"perturbations[{i}]"
        if p.start < 0 or p.end > fiber.length:
            out.error(
                location,
                f"section [{p.start:g}, {p.end:g}] m lies outside the fiber [0, {fiber.length:g}]",
            )
        if p.kind is PerturbationKind.ACOUSTIC_TONE:
            if p.frequency >= s.frame_rate / 2.0:
                out.error(
                    f"{location}.frequency",
                    f"tone at {p.frequency:g} Hz violates Nyquist for frame_rate "
                    f"{s.frame_rate:g} Hz",
                )
            peak = 2.0 * one_way_phase(p.index_amplitude, p.extent, probe.wavelength)
            step = peak * 2.0 * math.pi * p.frequency / s.frame_rate
            if step >= math.pi:
                out.error(
                    f"{location}.index_amplitude",
                    f"round-trip phase may change by {step:.3g} rad between frames; "
                    "unwrapping needs less than pi",
                )

    labels: dict[str, AnalysisKind] = {}
    for i, d in enumerate(s.analyses):
        location = f"analyses[{i}]"
        if d.label in labels:
            out.error(f"{location}.label", f"duplicate label '{d.label}'")
        _check_directive(s, d, location, labels, out)
        labels[d.label] = d.kind


_POSITION_COUNT = {AnalysisKind.RTT: 2, AnalysisKind.PHASE: 2, AnalysisKind.AMPLITUDE: 1}
_TONE_TARGETS = (AnalysisKind.RTT, AnalysisKind.PHASE, AnalysisKind.AMPLITUDE)


def _check_directive(
    s: Scenario,
    d: AnalysisDirective,
    location: str,
    earlier: Mapping[str, AnalysisKind],
    out: _Collector,
) -> None:
    expected = _POSITION_COUNT.get(d.kind)
    if expected is not None and len(d.positions) != expected:
        out.error(f"{location}.positions", f"{d.kind.value} needs {expected} position(s)")
    for z in d.positions:
        if not 0.0 <= z <= s.fiber.length:
            out.error(
                f"{location}.positions",
                f"position {z:g} m lies outside the fiber [0, {s.fiber.length:g}]",
            )

    if d.kind is AnalysisKind.TONE:
        if d.target not in earlier or earlier[d.target] not in _TONE_TARGETS:
            out.error(f"{location}.target", f"no earlier rtt/phase/amplitude series '{d.target}'")
        if d.f_min is None or d.f_max is None:
            out.error(location, "tone needs f_min and f_max")
        else:
            if d.f_max >= s.frame_rate / 2.0:
                out.error(f"{location}.f_max", "band reaches the Nyquist frequency")
            if d.f_min <= 0 or s.duration < 2.0 / d.f_min:
                out.error(f"{location}.f_min", "observation shorter than two periods of f_min")
    elif d.kind is AnalysisKind.TEMP:
        if earlier.get(d.target or "") is not AnalysisKind.RTT:
            out.error(f"{location}.target", f"no earlier rtt series '{d.target}'")
        if d.fiber_km is None or d.fiber_km <= 0:
            out.error(f"{location}.fiber_km", "temp needs fiber_km > 0")
    elif d.kind is AnalysisKind.LAG:
        if earlier.get(d.target or "") is not AnalysisKind.RTT:
            out.error(f"{location}.target", f"no earlier rtt series '{d.target}'")
        if d.fiber_km is None or d.fiber_km <= 0:
            out.error(f"{location}.fiber_km", "lag needs fiber_km > 0")
        series = [p for p in s.perturbations if p.kind is PerturbationKind.TEMPERATURE_SERIES]
        if len(series) != 1:
            out.error(location, "lag needs exactly one temperature_series perturbation")
    elif d.kind is AnalysisKind.FBG:
        if d.fbg is None:
            out.error(location, "fbg needs an 'fbg' object")
        else:
            if s.detection.mode is not DetectionMode.COHERENT:
                out.error("detection.mode", "FBG interrogation needs coherent detection")
            reach = d.fbg.positions()[-1] + d.fbg.spacing
            needed = _frame_samples_needed(s.probe, _max_round_trip(reach, s.fiber.group_index))
            if s.probe.frame_length < needed:
                out.error(f"{location}.fbg", "frame_period too short for the grating chain")
    if d.threshold_db is not None and d.threshold_db <= 0:
        out.error(f"{location}.threshold_db", "threshold_db must be > 0")


# --- public API ------------------------------------------------------------


def _parse(ref: str | Path) -> tuple[Scenario | None, list[Diagnostic]]:
    text, name, suffix = _read_source(ref)
    out = _Collector(_line_map(text))
    try:
        doc = yaml.safe_load(text) if suffix in (".yaml", ".yml") else json.loads(text)
    except json.JSONDecodeError as exc:
        out.diagnostics.append(Diagnostic(Severity.ERROR, "", exc.msg, exc.lineno))
        return None, out.diagnostics
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        out.diagnostics.append(Diagnostic(Severity.ERROR, "", str(exc), line))
        return None, out.diagnostics

    scenario = _build(doc, name, out)
    if scenario is not None:
        _check(scenario, out)
    return scenario, out.diagnostics


def validate(ref: str | Path) -> list[Diagnostic]:
    """All diagnostics for a scenario path or bundled name. Never writes files."""
    return _parse(ref)[1]


def load_scenario(ref: str | Path) -> Scenario:
    """Load and validate a scenario; raise ValueError listing its errors."""
    scenario, diagnostics = _parse(ref)
    errors = [d for d in diagnostics if d.severity is Severity.ERROR]
    for d in diagnostics:
        if d.severity is Severity.WARNING:
            logger.warning("%s", d)
    if errors or scenario is None:
        raise ValueError("invalid scenario:\n" + "\n".join(str(d) for d in errors))
    return scenario
