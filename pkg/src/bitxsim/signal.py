"""Sampled waveforms and the primitive block operations every stage uses.

All operations are pure: they never modify their inputs and return new
:class:`Signal` values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_SAMPLE_RATE_HZ = 40e6


class AliasingError(ValueError):
    """A requested frequency sits at or above the Nyquist limit."""


@dataclass(frozen=True, eq=False)
class Signal:
    """Uniformly sampled real voltage waveform.

    Attributes:
        samples: 1-D float64 array of volts (stored read-only).
        sample_rate_hz: sampling rate in Hz.
    """

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError(f"samples must be 1-D, got shape {samples.shape}")
        if samples.size < 1:
            raise ValueError("a signal needs at least one sample")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        rate = float(self.sample_rate_hz)
        if not (math.isfinite(rate) and rate > 0):
            raise ValueError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate_hz", rate)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz

    @property
    def nyquist_hz(self) -> float:
        return self.sample_rate_hz / 2

    def time(self) -> np.ndarray:
        return np.arange(self.samples.size) / self.sample_rate_hz

    def with_samples(self, samples) -> "Signal":
        return Signal(samples, self.sample_rate_hz)

    def head(self, n: int) -> "Signal":
        return Signal(self.samples[:n], self.sample_rate_hz)

    def tail(self, n: int) -> "Signal":
        return Signal(self.samples[-n:], self.sample_rate_hz)

    @classmethod
    def zeros(cls, n: int, sample_rate_hz: float) -> "Signal":
        return cls(np.zeros(n), sample_rate_hz)


@dataclass(frozen=True)
class FilterSpec:
    """Band-pass response: flat passband, raised-cosine skirts, flat stopband.

    ``bandwidth_hz`` is the full passband width centred on ``center_hz``;
    the skirt rolls off over ``transition_width_hz`` on each side, and
    everything beyond is held at ``-stopband_atten_db``.
    """

    center_hz: float
    bandwidth_hz: float
    transition_width_hz: float
    stopband_atten_db: float = 60.0

    def __post_init__(self):
        for name in ("center_hz", "bandwidth_hz", "transition_width_hz", "stopband_atten_db"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth_hz must be positive")
        if self.transition_width_hz <= 0:
            raise ValueError("transition_width_hz must be positive")
        if self.stopband_atten_db <= 0:
            raise ValueError("stopband_atten_db must be positive")
        if self.lower_stop_hz <= 0:
            raise ValueError(
                "passband must lie at positive frequencies: "
                f"center - bandwidth/2 - transition = {self.lower_stop_hz} Hz"
            )

    @property
    def lower_edge_hz(self) -> float:
        return self.center_hz - self.bandwidth_hz / 2

    @property
    def upper_edge_hz(self) -> float:
        return self.center_hz + self.bandwidth_hz / 2

    @property
    def lower_stop_hz(self) -> float:
        return self.lower_edge_hz - self.transition_width_hz

    @property
    def upper_stop_hz(self) -> float:
        return self.upper_edge_hz + self.transition_width_hz

    def check_rate(self, sample_rate_hz: float) -> None:
        if self.upper_stop_hz >= sample_rate_hz / 2:
            raise AliasingError(
                f"filter upper stop edge {self.upper_stop_hz} Hz reaches Nyquist "
                f"({sample_rate_hz / 2} Hz)"
            )

    def response(self, freqs_hz: np.ndarray) -> np.ndarray:
        """Magnitude response (linear) evaluated at ``freqs_hz``."""
        f = np.abs(np.asarray(freqs_hz, dtype=np.float64))
        floor = 10.0 ** (-self.stopband_atten_db / 20)
        # distance past the nearer passband edge, 0 inside the passband
        excess = np.maximum(self.lower_edge_hz - f, f - self.upper_edge_hz)
        excess = np.clip(excess / self.transition_width_hz, 0.0, 1.0)
        skirt = 0.5 * (1.0 + np.cos(np.pi * excess))
        return floor + (1.0 - floor) * skirt


# -- validation helpers -------------------------------------------------------


def check_signal(s, name: str = "signal") -> Signal:
    if not isinstance(s, Signal):
        raise TypeError(f"{name} must be a Signal, got {type(s).__name__}")
    return s


def check_same_grid(a: Signal, b: Signal) -> None:
    """Raise ValueError unless ``a`` and ``b`` share sample rate and length."""
    check_signal(a, "a")
    check_signal(b, "b")
    if a.sample_rate_hz != b.sample_rate_hz:
        raise ValueError(
            f"sample rate mismatch: {a.sample_rate_hz} Hz vs {b.sample_rate_hz} Hz"
        )
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)} samples")


def check_below_nyquist(freq_hz: float, sample_rate_hz: float) -> None:
    if freq_hz >= sample_rate_hz / 2:
        raise AliasingError(
            f"{freq_hz} Hz is at or above Nyquist ({sample_rate_hz / 2} Hz)"
        )


def n_samples(duration_s: float, sample_rate_hz: float) -> int:
    """Sample count for ``duration_s``, tolerant of float round-off."""
    if not duration_s > 0:
        raise ValueError(f"duration_s must be positive, got {duration_s}")
    if not sample_rate_hz > 0:
        raise ValueError(f"sample_rate_hz must be positive, got {sample_rate_hz}")
    n = int(round(duration_s * sample_rate_hz))
    return max(n, 1)


# -- operations ----------------------------------------------------------------


def make_tone(freq_hz, amplitude_vpp, duration_s, sample_rate_hz=DEFAULT_SAMPLE_RATE_HZ, phase_rad=0.0) -> Signal:
    """Cosine test tone, ``(amplitude_vpp/2) * cos(2*pi*f*n/fs + phase)``."""
    if not freq_hz > 0:
        raise ValueError(f"freq_hz must be positive, got {freq_hz}")
    check_below_nyquist(freq_hz, sample_rate_hz)
    if amplitude_vpp < 0:
        raise ValueError("amplitude_vpp must be non-negative")
    n = np.arange(n_samples(duration_s, sample_rate_hz))
    x = (amplitude_vpp / 2) * np.cos(2 * np.pi * freq_hz * n / sample_rate_hz + phase_rad)
    return Signal(x, sample_rate_hz)


def multiply(a: Signal, b: Signal) -> Signal:
    check_same_grid(a, b)
    return a.with_samples(a.samples * b.samples)


def add(a: Signal, b: Signal) -> Signal:
    check_same_grid(a, b)
    return a.with_samples(a.samples + b.samples)


def db_to_gain(gain_db: float) -> float:
    return 10.0 ** (gain_db / 20.0)


def scale_db(s: Signal, gain_db: float) -> Signal:
    check_signal(s)
    if not math.isfinite(gain_db):
        raise ValueError("gain_db must be finite")
    if gain_db == 0:
        return s
    return s.with_samples(s.samples * db_to_gain(gain_db))


def soft_clip(s: Signal, clip_level_v: float, low_clip_level_v: float | None = None) -> Signal:
    """Hard-knee limiter.

    Samples inside the rails pass untouched. The negative rail defaults to
    ``-clip_level_v``; pass ``low_clip_level_v`` for an asymmetric swing.
    """
    check_signal(s)
    if not clip_level_v > 0:
        raise ValueError(f"clip_level_v must be positive, got {clip_level_v}")
    low = clip_level_v if low_clip_level_v is None else low_clip_level_v
    if not low > 0:
        raise ValueError(f"low_clip_level_v must be positive, got {low_clip_level_v}")
    return s.with_samples(np.clip(s.samples, -low, clip_level_v))


def _apply_mask(s: Signal, mask: np.ndarray) -> Signal:
    spectrum = np.fft.rfft(s.samples)
    return s.with_samples(np.fft.irfft(spectrum * mask, n=len(s)))


def bandpass(s: Signal, spec: FilterSpec) -> Signal:
    """Zero-phase band-pass applied as a real mask on the signal's spectrum."""
    check_signal(s)
    spec.check_rate(s.sample_rate_hz)
    freqs = np.fft.rfftfreq(len(s), d=1.0 / s.sample_rate_hz)
    return _apply_mask(s, spec.response(freqs))


def lowpass(s: Signal, cutoff_hz: float, transition_width_hz: float, stopband_atten_db: float = 60.0) -> Signal:
    """Zero-phase low-pass with the same raised-cosine skirt as :func:`bandpass`."""
    check_signal(s)
    if not (cutoff_hz > 0 and transition_width_hz > 0):
        raise ValueError("cutoff_hz and transition_width_hz must be positive")
    check_below_nyquist(cutoff_hz + transition_width_hz, s.sample_rate_hz)
    freqs = np.fft.rfftfreq(len(s), d=1.0 / s.sample_rate_hz)
    floor = 10.0 ** (-stopband_atten_db / 20)
    excess = np.clip((freqs - cutoff_hz) / transition_width_hz, 0.0, 1.0)
    mask = floor + (1.0 - floor) * 0.5 * (1.0 + np.cos(np.pi * excess))
    return _apply_mask(s, mask)


def mean_square(s: Signal) -> float:
    return float(np.mean(s.samples ** 2))
