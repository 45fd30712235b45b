"""Shared test fixtures."""

from __future__ import annotations

import json

import numpy as np
import pytest

from cotdr.models.enums import DetectionMode, Modulation
from cotdr.models.signals import CorrTrace
from cotdr.models.specs import DetectionConfig, FiberSpec, ProbeSpec, Reflector


@pytest.fixture
def probe():
    """PRBS-7 BPSK at 1 Gbps, two samples per bit, 1000-sample frames."""
    return ProbeSpec(
        prbs_order=7,
        modulation=Modulation.BPSK,
        bit_rate=1e9,
        samples_per_bit=2,
        frame_period=5e-7,
    )


@pytest.fixture
def fiber():
    """20 m fiber with two reflectors and no backscatter."""
    return FiberSpec(
        length=20.0,
        backscatter_coeff=None,
        reflectors=(Reflector(2.0, 30.0), Reflector(15.0, 30.0)),
    )


@pytest.fixture
def coherent():
    return DetectionConfig(mode=DetectionMode.COHERENT, thermal_noise_sigma=1e-3)


@pytest.fixture
def scenario_doc():
    """A small valid scenario document."""
    return {
        "description": "two reflectors",
        "seed": 1,
        "frames": 8,
        "frame_rate": 1000.0,
        "probe": {
            "prbs_order": 7,
            "modulation": "bpsk",
            "bit_rate": 1e9,
            "samples_per_bit": 2,
            "frame_period": 5e-7,
        },
        "fiber": {
            "length": 20.0,
            "backscatter_coeff": None,
            "reflectors": [
                {"position": 2.0, "return_loss": 30.0},
                {"position": 15.0, "class": "pc"},
            ],
        },
        "detection": {"mode": "coherent", "thermal_noise_sigma": 1e-3},
        "perturbations": [],
        "analyses": [
            {"kind": "peaks", "label": "events"},
            {"kind": "rtt", "label": "rtt", "positions": [2.0, 15.0], "fit": "triangle"},
            {"kind": "phase", "label": "phase", "positions": [2.0, 15.0]},
        ],
    }


@pytest.fixture
def write_scenario(tmp_path):
    """Write a scenario document as JSON and return its path."""

    def write(doc, name="scenario"):
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(doc, indent=2), encoding="utf-8")
        return path

    return write


@pytest.fixture
def triangle_trace():
    """Build noiseless traces of triangular peaks centered at fractional bins."""

    def build(centers, length=64, half_width=3.0, height=1.0, sample_period=1e-9):
        k = np.arange(length)
        values = np.zeros(length)
        for c in centers:
            values += height * np.clip(1.0 - np.abs(k - c) / half_width, 0.0, None)
        return CorrTrace(values=values.astype(np.complex128), sample_period=sample_period)

    return build
