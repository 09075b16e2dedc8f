"""Transmit and receive pipelines built from shared transceiver blocks."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, fields, replace

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import instruments
from .oscillators import OscillatorSpec, effective_frequency, working_frequency
from .signal import FilterSpec, Signal, check_signal, n_samples
from .stages import (
    AUDIO_HIGH_HZ,
    AUDIO_LOW_HZ,
    BalancedModulator,
    BandPassFilter,
    ClassAAmplifier,
    Direction,
    DoubleBalancedMixer,
    MicPreamp,
    Stage,
    StageKind,
)

SIDEBANDS = ("LSB", "USB")
MAX_SSB_BANDWIDTH_HZ = 3e3
# sample rate must exceed this multiple of the BFO + VFO sum product
MIN_RATE_FACTOR = 3.0


class ConfigError(ValueError):
    """A transceiver configuration breaks one of its invariants."""

    def __init__(self, invariant: str, message: str):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


class OutOfBandAudioWarning(UserWarning):
    """The audio tone cannot pass the SSB filter; expect no useful emission."""


@dataclass(frozen=True)
class TransceiverConfig:
    bfo: OscillatorSpec
    vfo: OscillatorSpec
    ssb_filter: FilterSpec
    bpf: FilterSpec
    bpf_enabled: bool = True
    mic_gain_db: float = 30.0
    if2_gain_db: float = 15.0
    if1_gain_db: float = 15.0
    rf_gain_db: float = 10.0
    driver_gain_db: float = 10.0
    af_gain_db: float = 40.0
    carrier_suppression_db: float = 40.0
    sideband: str = "LSB"
    sample_rate_hz: float = 40e6
    duration_s: float = 25e-3
    clip_level_v: float = 6.0
    low_clip_level_v: float = 5.8
    output_loss_db: float = 0.0

    @property
    def bfo_hz(self) -> float:
        return effective_frequency(self.bfo)

    @property
    def vfo_hz(self) -> float:
        return effective_frequency(self.vfo)

    @property
    def carrier_hz(self) -> float:
        """Suppressed-carrier position of the emission."""
        return working_frequency(self.bfo_hz, self.vfo_hz)

    @property
    def n_samples(self) -> int:
        return n_samples(self.duration_s, self.sample_rate_hz)

    def emission_hz(self, tone_hz: float) -> float:
        """Where a single audio tone lands on air."""
        sign = -1.0 if self.sideband == "LSB" else 1.0
        return self.carrier_hz + sign * tone_hz

    def passable_audio_band(self) -> tuple[float, float]:
        """Audio range that survives both the mic band and the SSB filter."""
        if self.sideband == "LSB":
            lo = self.bfo_hz - self.ssb_filter.upper_edge_hz
            hi = self.bfo_hz - self.ssb_filter.lower_edge_hz
        else:
            lo = self.ssb_filter.lower_edge_hz - self.bfo_hz
            hi = self.ssb_filter.upper_edge_hz - self.bfo_hz
        return max(lo, AUDIO_LOW_HZ), min(hi, AUDIO_HIGH_HZ)

    def with_sideband(self, sideband: str) -> "TransceiverConfig":
        """Switch sideband by pulling the BFO to the opposite filter edge."""
        if sideband not in SIDEBANDS:
            raise ConfigError("sideband", f"must be one of {SIDEBANDS}, got {sideband!r}")
        offset = abs(self.bfo.offset_hz)
        bfo = self.bfo.with_offset(offset if sideband == "LSB" else -offset)
        return replace(self, sideband=sideband, bfo=bfo)

    def check(self) -> "TransceiverConfig":
        """Raise :class:`ConfigError` naming the first broken invariant."""
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, float) and not math.isfinite(value):
                raise ConfigError("finite_parameters", f"{f.name} = {value}")
        if self.sideband not in SIDEBANDS:
            raise ConfigError("sideband", f"must be one of {SIDEBANDS}, got {self.sideband!r}")
        try:
            self.bfo.check_vxo()
        except ValueError as exc:
            raise ConfigError("bfo_vxo_range", str(exc)) from None
        off = self.bfo.offset_hz
        if (self.sideband == "LSB" and off <= 0) or (self.sideband == "USB" and off >= 0):
            raise ConfigError(
                "sideband_bfo_offset",
                f"{self.sideband} needs the BFO pulled {'up' if self.sideband == 'LSB' else 'down'}, "
                f"offset is {off} Hz",
            )
        if self.ssb_filter.center_hz != self.bfo.nominal_freq_hz:
            raise ConfigError(
                "ssb_center_matches_bfo",
                f"SSB filter centre {self.ssb_filter.center_hz} Hz != BFO nominal "
                f"{self.bfo.nominal_freq_hz} Hz",
            )
        if self.ssb_filter.bandwidth_hz > MAX_SSB_BANDWIDTH_HZ:
            raise ConfigError(
                "ssb_bandwidth", f"{self.ssb_filter.bandwidth_hz} Hz exceeds {MAX_SSB_BANDWIDTH_HZ:g} Hz"
            )
        try:
            carrier = self.carrier_hz
        except ValueError as exc:
            raise ConfigError("frequency_plan", str(exc)) from None
        if abs(self.bpf.center_hz - carrier) > self.bpf.bandwidth_hz / 2:
            raise ConfigError(
                "bpf_on_channel",
                f"BPF centre {self.bpf.center_hz} Hz is more than half its bandwidth from the "
                f"working frequency {carrier} Hz",
            )
        min_rate = MIN_RATE_FACTOR * (self.bfo.nominal_freq_hz + self.vfo.nominal_freq_hz)
        if self.sample_rate_hz < min_rate:
            raise ConfigError(
                "sample_rate", f"{self.sample_rate_hz} Hz is below {MIN_RATE_FACTOR:g} x (BFO + VFO) = {min_rate} Hz"
            )
        for name in ("ssb_filter", "bpf"):
            try:
                getattr(self, name).check_rate(self.sample_rate_hz)
            except ValueError as exc:
                raise ConfigError(f"{name}_nyquist", str(exc)) from None
        if not self.duration_s > 0:
            raise ConfigError("duration", f"duration_s must be positive, got {self.duration_s}")
        if not (self.clip_level_v > 0 and self.low_clip_level_v > 0):
            raise ConfigError("clip_levels", "amplifier rails must be positive")
        if self.carrier_suppression_db < 0:
            raise ConfigError("carrier_suppression", "carrier_suppression_db must be >= 0")
        return self


def default_config() -> TransceiverConfig:
    """The shipped bench configuration (loaded from ``data/default.cfg``)."""
    from .io import load_default_config

    return load_default_config()


# -- registry ------------------------------------------------------------------


@dataclass(frozen=True)
class Block:
    instance_id: str
    direction: Direction


@dataclass(frozen=True)
class ChainRegistry:
    """Which block instance fills each role, and the order of both pipelines."""

    blocks: dict
    tx: tuple
    rx: tuple
    stages: dict = field(repr=False, compare=False, default_factory=dict)

    def tx_ids(self) -> list[str]:
        return [self.blocks[k].instance_id for k in self.tx]

    def rx_ids(self) -> list[str]:
        return [self.blocks[k].instance_id for k in self.rx]

    def check(self) -> "ChainRegistry":
        tx_ids, rx_ids = set(self.tx_ids()), set(self.rx_ids())
        for kind, block in self.blocks.items():
            if block.direction is Direction.BIDIRECTIONAL:
                if block.instance_id not in tx_ids or block.instance_id not in rx_ids:
                    raise AssertionError(f"shared block {kind.value} missing from a pipeline")
            elif block.direction is Direction.TX_ONLY and block.instance_id in rx_ids:
                raise AssertionError(f"transmit-only block {kind.value} found in the receive pipeline")
            elif block.direction is Direction.RX_ONLY and block.instance_id in tx_ids:
                raise AssertionError(f"receive-only block {kind.value} found in the transmit pipeline")
        return self


TX_ORDER = (
    StageKind.MIC_AMP, StageKind.SBM, StageKind.IF_AMP_2, StageKind.SSB_FILTER, StageKind.IF_AMP_1,
    StageKind.DBM, StageKind.RF_AMP, StageKind.DRIVER_AMP, StageKind.BPF,
)
RX_ORDER = (
    StageKind.BPF, StageKind.RF_AMP, StageKind.DBM, StageKind.IF_AMP_1, StageKind.SSB_FILTER,
    StageKind.IF_AMP_2, StageKind.DETECTOR, StageKind.AF_AMP,
)


def _make_stages(config: TransceiverConfig) -> dict:
    def amp(kind, gain_db):
        return ClassAAmplifier(gain_db, config.clip_level_v, config.low_clip_level_v, kind=kind)

    sbm = BalancedModulator(config.bfo, config.carrier_suppression_db)
    return {
        StageKind.MIC_AMP: MicPreamp(config.mic_gain_db),
        StageKind.SBM: sbm,
        StageKind.IF_AMP_2: amp(StageKind.IF_AMP_2, config.if2_gain_db),
        StageKind.SSB_FILTER: BandPassFilter(config.ssb_filter, True, kind=StageKind.SSB_FILTER),
        StageKind.IF_AMP_1: amp(StageKind.IF_AMP_1, config.if1_gain_db),
        StageKind.DBM: DoubleBalancedMixer(config.vfo),
        StageKind.RF_AMP: amp(StageKind.RF_AMP, config.rf_gain_db),
        StageKind.DRIVER_AMP: amp(StageKind.DRIVER_AMP, config.driver_gain_db),
        StageKind.BPF: BandPassFilter(config.bpf, config.bpf_enabled, kind=StageKind.BPF),
        StageKind.DETECTOR: sbm,
        StageKind.AF_AMP: amp(StageKind.AF_AMP, config.af_gain_db),
    }


def build_chain(config: TransceiverConfig) -> ChainRegistry:
    """Validate ``config`` and lay out both pipelines over one set of blocks."""
    config.check()
    stages = _make_stages(config)
    labels: dict[int, str] = {}
    blocks = {}
    for kind in StageKind:
        obj = stages[kind]
        if id(obj) not in labels:
            labels[id(obj)] = f"{obj.kind.value}#{len(labels)}"
        blocks[kind] = Block(labels[id(obj)], kind.direction)
    return ChainRegistry(blocks, TX_ORDER, RX_ORDER, stages).check()


# -- whole-chain operations ----------------------------------------------------


def _check_input(config: TransceiverConfig, s: Signal, name: str) -> None:
    check_signal(s, name)
    if s.sample_rate_hz != config.sample_rate_hz:
        raise ValueError(f"{name} rate {s.sample_rate_hz} Hz != config rate {config.sample_rate_hz} Hz")


def _dominant_audio_hz(audio: Signal) -> float | None:
    if not np.any(audio.samples):
        return None
    spectrum = np.abs(np.fft.rfft(audio.samples - audio.samples.mean()))
    k = int(np.argmax(spectrum))
    return k * audio.sample_rate_hz / len(audio)


def run_tx(registry: ChainRegistry, config: TransceiverConfig, audio: Signal, taps: dict | None = None) -> Signal:
    s = audio
    for kind in registry.tx:
        s = registry.stages[kind].transform(s)
        if taps is not None:
            taps[kind] = s
    if config.output_loss_db:
        s = s.with_samples(s.samples * 10.0 ** (-config.output_loss_db / 20.0))
    return s


def run_rx(registry: ChainRegistry, config: TransceiverConfig, rf: Signal, taps: dict | None = None) -> Signal:
    s = rf
    for kind in registry.rx:
        s = registry.stages[kind].inverse_transform(s)
        if taps is not None:
            taps[kind] = s
    return s


def transmit(config: TransceiverConfig, audio: Signal, taps: dict | None = None) -> Signal:
    """Audio in, antenna-port voltage out.

    Audio whose dominant tone falls outside the passable band triggers an
    :class:`OutOfBandAudioWarning` rather than an exception.
    """
    registry = build_chain(config)
    _check_input(config, audio, "audio")
    if len(audio) != config.n_samples:
        raise ValueError(f"audio has {len(audio)} samples, config expects {config.n_samples}")
    f_audio = _dominant_audio_hz(audio)
    lo, hi = config.passable_audio_band()
    if f_audio is not None and not lo <= f_audio <= hi:
        warnings.warn(
            f"audio tone {f_audio:.1f} Hz is outside the passable {lo:.0f}-{hi:.0f} Hz band",
            OutOfBandAudioWarning,
            stacklevel=2,
        )
    return run_tx(registry, config, audio, taps)


def receive(config: TransceiverConfig, rf: Signal, taps: dict | None = None) -> Signal:
    registry = build_chain(config)
    _check_input(config, rf, "rf")
    return run_rx(registry, config, rf, taps)


def harmonic_report(config: TransceiverConfig, audio: Signal, search_hz: float = 5e3) -> list[tuple[float, float]]:
    """Transmit-output power at 1x..4x the emitted fundamental.

    The fundamental is the strongest line within ``search_hz`` of the
    working frequency. Harmonics above Nyquist are read where the sampled
    chain folds them.
    """
    rf = transmit(config, audio)
    spec = instruments.measure_spectrum(rf)
    lo = spec.nearest_bin(config.carrier_hz - search_hz)
    hi = spec.nearest_bin(config.carrier_hz + search_hz)
    k0 = lo + int(np.argmax(spec.power_dbm[lo:hi + 1]))
    f0 = float(spec.bin_freqs_hz[k0])
    report = []
    for n in range(1, 5):
        report.append((n * f0, spec.level_at(fold_frequency(n * f0, rf.sample_rate_hz), 2)))
    return report


def fold_frequency(freq_hz: float, sample_rate_hz: float) -> float:
    """Alias ``freq_hz`` into the first Nyquist zone."""
    f = math.fmod(freq_hz, sample_rate_hz)
    return sample_rate_hz - f if f > sample_rate_hz / 2 else f


@dataclass(frozen=True)
class AudioReading:
    freq_hz: float
    snr_db: float


def analyze_audio(audio: Signal, band=(AUDIO_LOW_HZ, AUDIO_HIGH_HZ), halfwidth_bins: int = 3) -> AudioReading:
    """Dominant tone frequency and its SNR against the rest of the audio band.

    The frequency is the strongest bin in ``band`` refined by a parabola
    through the log levels of its neighbours. SNR compares the tone's bins
    with all other bins in ``band``.
    """
    check_signal(audio, "audio")
    spec = instruments.measure_spectrum(audio)
    p = spec.power_w()
    lo, hi = spec.nearest_bin(band[0]), spec.nearest_bin(band[1])
    k = lo + int(np.argmax(p[lo:hi + 1]))
    in_band = np.zeros(p.size, dtype=bool)
    in_band[lo:hi + 1] = True
    tone = np.zeros(p.size, dtype=bool)
    tone[max(k - halfwidth_bins, 0):k + halfwidth_bins + 1] = True
    signal_w = p[tone].sum()
    noise_w = p[in_band & ~tone].sum()
    snr = math.inf if noise_w == 0 else 10 * math.log10(signal_w / noise_w)

    delta = 0.0
    if 0 < k < p.size - 1:
        a, b, c = spec.power_dbm[k - 1:k + 2]
        denom = a - 2 * b + c
        if denom < 0:
            delta = 0.5 * (a - c) / denom
    return AudioReading(float((k + delta) * spec.resolution_hz), snr)


# -- estimator -------------------------------------------------------------------


class BitxTransceiver(TransformerMixin, BaseEstimator):
    """Whole transceiver as a transformer: ``transform`` transmits, ``inverse_transform`` receives.

    ``fit`` validates the configuration and builds the shared-block
    registry (``registry_``); it ignores its data argument.
    """

    def __init__(self, config=None):
        self.config = config

    def fit(self, X=None, y=None):
        self.config_ = default_config() if self.config is None else self.config
        self.registry_ = build_chain(self.config_)
        return self

    def transform(self, X):
        check_is_fitted(self, "registry_")
        return transmit(self.config_, X)

    def inverse_transform(self, X):
        check_is_fitted(self, "registry_")
        return receive(self.config_, X)
