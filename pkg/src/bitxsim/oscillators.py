"""BFO and VFO sources and the frequency-plan arithmetic that ties them together."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .signal import DEFAULT_SAMPLE_RATE_HZ, Signal, check_below_nyquist, make_tone, n_samples

# crystal pull range of the BFO VXO
VXO_PULL_LIMIT_HZ = 1.5e3


class FrequencyPlanError(ValueError):
    """The oscillator arithmetic has no positive solution."""


@dataclass(frozen=True)
class OscillatorSpec:
    nominal_freq_hz: float
    offset_hz: float = 0.0
    amplitude_vpp: float = 1.0
    phase_rad: float = 0.0
    drift_hz_per_s: float = 0.0

    def __post_init__(self):
        for name in ("nominal_freq_hz", "offset_hz", "amplitude_vpp", "phase_rad", "drift_hz_per_s"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.nominal_freq_hz <= 0:
            raise ValueError("nominal_freq_hz must be positive")
        if self.amplitude_vpp < 0:
            raise ValueError("amplitude_vpp must be non-negative")
        if self.nominal_freq_hz + self.offset_hz <= 0:
            raise ValueError("effective frequency must be positive")

    def check_vxo(self) -> None:
        """Raise unless the offset fits within the BFO crystal pull range."""
        if abs(self.offset_hz) > VXO_PULL_LIMIT_HZ:
            raise ValueError(
                f"BFO offset {self.offset_hz} Hz exceeds the ±{VXO_PULL_LIMIT_HZ:g} Hz VXO pull range"
            )

    def with_offset(self, offset_hz: float) -> "OscillatorSpec":
        return replace(self, offset_hz=offset_hz)


def effective_frequency(spec: OscillatorSpec) -> float:
    return spec.nominal_freq_hz + spec.offset_hz


def generate(spec: OscillatorSpec, duration_s: float, sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ) -> Signal:
    """Sample the oscillator, integrating a linear frequency drift into the phase."""
    f0 = effective_frequency(spec)
    check_below_nyquist(max(f0, f0 + spec.drift_hz_per_s * duration_s), sample_rate_hz)
    if spec.drift_hz_per_s == 0:
        return make_tone(f0, spec.amplitude_vpp, duration_s, sample_rate_hz, spec.phase_rad)
    t = np.arange(n_samples(duration_s, sample_rate_hz)) / sample_rate_hz
    phase = 2 * np.pi * (f0 * t + 0.5 * spec.drift_hz_per_s * t ** 2) + spec.phase_rad
    return Signal((spec.amplitude_vpp / 2) * np.cos(phase), sample_rate_hz)


def generate_like(spec: OscillatorSpec, template: Signal) -> Signal:
    """Oscillator output on the same sample grid as ``template``."""
    return generate(spec, template.duration_s, template.sample_rate_hz)


def required_vfo(bfo_hz: float, working_hz: float) -> float:
    if not working_hz > 0:
        raise FrequencyPlanError(f"working frequency must be positive, got {working_hz}")
    vfo = bfo_hz - working_hz
    if not vfo > 0:
        raise FrequencyPlanError(
            f"BFO {bfo_hz} Hz must exceed the working frequency {working_hz} Hz"
        )
    return vfo


def working_frequency(bfo_hz: float, vfo_hz: float) -> float:
    if not vfo_hz > 0:
        raise FrequencyPlanError(f"VFO must be positive, got {vfo_hz}")
    working = bfo_hz - vfo_hz
    if not working > 0:
        raise FrequencyPlanError(f"BFO {bfo_hz} Hz must exceed the VFO {vfo_hz} Hz")
    return working
