"""The transceiver blocks, as plain functions and as sklearn-style transformers.

Every transformer is stateless: ``fit`` only returns ``self``. For blocks
that the transmitter and receiver share, ``transform`` runs the transmit
direction and ``inverse_transform`` the receive direction.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .oscillators import OscillatorSpec, generate_like
from .signal import (
    FilterSpec,
    Signal,
    bandpass,
    check_same_grid,
    check_signal,
    lowpass,
    multiply,
    scale_db,
    soft_clip,
)

AUDIO_LOW_HZ = 300.0
AUDIO_HIGH_HZ = 3400.0
MIC_FILTER = FilterSpec(
    center_hz=(AUDIO_LOW_HZ + AUDIO_HIGH_HZ) / 2,
    bandwidth_hz=AUDIO_HIGH_HZ - AUDIO_LOW_HZ,
    transition_width_hz=150.0,
    stopband_atten_db=60.0,
)
DETECTOR_CUTOFF_HZ = AUDIO_HIGH_HZ
DETECTOR_TRANSITION_HZ = 600.0
DEFAULT_CLIP_LEVEL_V = 6.0
DEFAULT_CARRIER_SUPPRESSION_DB = 40.0


class Direction(enum.Enum):
    TX_ONLY = "tx_only"
    RX_ONLY = "rx_only"
    BIDIRECTIONAL = "bidirectional"


class StageKind(enum.Enum):
    MIC_AMP = "mic_amp"
    SBM = "sbm"
    IF_AMP_2 = "if_amp_2"
    SSB_FILTER = "ssb_filter"
    IF_AMP_1 = "if_amp_1"
    DBM = "dbm"
    RF_AMP = "rf_amp"
    DRIVER_AMP = "driver_amp"
    BPF = "bpf"
    DETECTOR = "detector"
    AF_AMP = "af_amp"

    @property
    def direction(self) -> Direction:
        return _DIRECTIONS[self]


# DETECTOR is the SBM block working in reverse, so it inherits the SBM's tag.
_DIRECTIONS = {
    StageKind.MIC_AMP: Direction.TX_ONLY,
    StageKind.DRIVER_AMP: Direction.TX_ONLY,
    StageKind.AF_AMP: Direction.RX_ONLY,
    StageKind.SBM: Direction.BIDIRECTIONAL,
    StageKind.DETECTOR: Direction.BIDIRECTIONAL,
    StageKind.IF_AMP_2: Direction.BIDIRECTIONAL,
    StageKind.SSB_FILTER: Direction.BIDIRECTIONAL,
    StageKind.IF_AMP_1: Direction.BIDIRECTIONAL,
    StageKind.DBM: Direction.BIDIRECTIONAL,
    StageKind.RF_AMP: Direction.BIDIRECTIONAL,
    StageKind.BPF: Direction.BIDIRECTIONAL,
}


@dataclass(frozen=True)
class AmplifierSpec:
    """Class A stage: linear gain up to the rails, hard limiting beyond.

    ``low_clip_level_v`` sets the negative rail when the swing is not
    symmetric about the bias point; ``None`` mirrors ``clip_level_v``.
    """

    gain_db: float
    clip_level_v: float = DEFAULT_CLIP_LEVEL_V
    low_clip_level_v: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.gain_db):
            raise ValueError("gain_db must be finite")
        if not self.clip_level_v > 0:
            raise ValueError("clip_level_v must be positive")
        if self.low_clip_level_v is not None and not self.low_clip_level_v > 0:
            raise ValueError("low_clip_level_v must be positive")


# -- stage functions -----------------------------------------------------------


def mic_preamp(audio: Signal, gain_db: float) -> Signal:
    """Band-limit to the speech band, then apply the preamp gain."""
    check_signal(audio, "audio")
    if audio.sample_rate_hz < 8e3:
        raise ValueError(f"audio sample rate must be at least 8 kHz, got {audio.sample_rate_hz}")
    return scale_db(bandpass(audio, MIC_FILTER), gain_db)


def normalize_peak(s: Signal, peak_v: float = 1.0) -> Signal:
    peak = np.max(np.abs(s.samples))
    if peak == 0:
        return s
    return s.with_samples(s.samples * (peak_v / peak))


def sbm_modulate(audio: Signal, bfo: Signal, carrier_suppression_db: float = DEFAULT_CARRIER_SUPPRESSION_DB) -> Signal:
    """DSB suppressed-carrier output of the single balanced modulator.

    Audio is peak-normalized to 1 V, so a full-scale tone puts each sideband
    at half the BFO amplitude. The imperfectly balanced carrier is added back
    ``carrier_suppression_db`` below that sideband level; ``math.inf`` gives
    the ideal multiplier.
    """
    check_same_grid(audio, bfo)
    if not carrier_suppression_db >= 0:
        raise ValueError("carrier_suppression_db must be >= 0")
    dsb = multiply(normalize_peak(audio), bfo)
    if math.isinf(carrier_suppression_db):
        return dsb
    leak = 0.5 * 10.0 ** (-carrier_suppression_db / 20.0)
    return dsb.with_samples(dsb.samples + leak * bfo.samples)


def dbm_mix(if_sig: Signal, vfo: Signal) -> Signal:
    """Ideal double balanced mixer: both inputs cancelled, sum and difference out."""
    return multiply(if_sig, vfo)


def class_a_amp(s: Signal, spec: AmplifierSpec) -> Signal:
    return soft_clip(scale_db(s, spec.gain_db), spec.clip_level_v, spec.low_clip_level_v)


def product_detect(if_sig: Signal, bfo: Signal) -> Signal:
    """Beat the IF against the BFO and keep the audio band."""
    return lowpass(multiply(if_sig, bfo), DETECTOR_CUTOFF_HZ, DETECTOR_TRANSITION_HZ)


# -- transformers --------------------------------------------------------------


class Stage(TransformerMixin, BaseEstimator):
    """Base for the signal-chain blocks. Stateless, so always "fitted"."""

    kind: StageKind

    def fit(self, X, y=None):
        check_signal(X, "X")
        return self

    def __sklearn_is_fitted__(self):
        return True

    def transform(self, X):
        raise NotImplementedError

    def inverse_transform(self, X):
        raise NotImplementedError(f"{type(self).__name__} has no receive direction")


class MicPreamp(Stage):
    kind = StageKind.MIC_AMP

    def __init__(self, gain_db=30.0):
        self.gain_db = gain_db

    def transform(self, X):
        return mic_preamp(X, self.gain_db)


class BalancedModulator(Stage):
    """SBM with its BFO: modulator on transmit, product detector on receive."""

    kind = StageKind.SBM

    def __init__(self, bfo=None, carrier_suppression_db=DEFAULT_CARRIER_SUPPRESSION_DB):
        self.bfo = bfo
        self.carrier_suppression_db = carrier_suppression_db

    def _carrier(self, X):
        if not isinstance(self.bfo, OscillatorSpec):
            raise ValueError("bfo must be an OscillatorSpec")
        return generate_like(self.bfo, check_signal(X, "X"))

    def transform(self, X):
        return sbm_modulate(X, self._carrier(X), self.carrier_suppression_db)

    def inverse_transform(self, X):
        return product_detect(X, self._carrier(X))


class DoubleBalancedMixer(Stage):
    """DBM with its VFO; the same product serves both directions."""

    kind = StageKind.DBM

    def __init__(self, vfo=None):
        self.vfo = vfo

    def transform(self, X):
        if not isinstance(self.vfo, OscillatorSpec):
            raise ValueError("vfo must be an OscillatorSpec")
        return dbm_mix(X, generate_like(self.vfo, check_signal(X, "X")))

    inverse_transform = transform


class ClassAAmplifier(Stage):
    def __init__(self, gain_db=0.0, clip_level_v=DEFAULT_CLIP_LEVEL_V, low_clip_level_v=None, kind=StageKind.IF_AMP_1):
        self.gain_db = gain_db
        self.clip_level_v = clip_level_v
        self.low_clip_level_v = low_clip_level_v
        self.kind = kind

    @property
    def spec(self) -> AmplifierSpec:
        return AmplifierSpec(self.gain_db, self.clip_level_v, self.low_clip_level_v)

    def transform(self, X):
        return class_a_amp(X, self.spec)

    inverse_transform = transform


class BandPassFilter(Stage):
    """Passive band-pass; ``enabled=False`` bypasses it in both directions."""

    def __init__(self, spec=None, enabled=True, kind=StageKind.BPF):
        self.spec = spec
        self.enabled = enabled
        self.kind = kind

    def transform(self, X):
        if not self.enabled:
            return check_signal(X, "X")
        return bandpass(X, self.spec)

    inverse_transform = transform
