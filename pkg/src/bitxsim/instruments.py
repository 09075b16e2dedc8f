"""Virtual bench instruments: spectrum analyzer, counter, scope, band chart."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import get_window

from .signal import Signal, check_signal

REFERENCE_IMPEDANCE_OHMS = 50.0
FLOOR_DBM = -120.0
MIN_ZERO_CROSSINGS = 8


class MeasurementError(ValueError):
    """The instrument cannot produce a reading for this input."""


@dataclass(frozen=True, eq=False)
class Spectrum:
    """One-sided power spectrum, dBm per bin into 50 ohms.

    Bin levels carry the window's coherent-gain correction, so a pure tone
    sitting on a bin centre reads its true power in that bin. Summing bins
    over-counts by the window's equivalent noise bandwidth; see
    :meth:`total_power_w`.
    """

    bin_freqs_hz: np.ndarray
    power_dbm: np.ndarray
    resolution_hz: float
    window_name: str = "hann"
    enbw_bins: float = 1.5

    def __len__(self):
        return self.bin_freqs_hz.size

    def nearest_bin(self, freq_hz: float) -> int:
        if not 0 <= freq_hz <= self.bin_freqs_hz[-1] + self.resolution_hz / 2:
            raise MeasurementError(
                f"{freq_hz} Hz is outside the analyzer span 0..{self.bin_freqs_hz[-1]} Hz"
            )
        return min(int(round(freq_hz / self.resolution_hz)), len(self) - 1)

    def level_at(self, freq_hz: float, neighborhood: int = 0) -> float:
        """Highest bin level within ``neighborhood`` bins of ``freq_hz``."""
        k = self.nearest_bin(freq_hz)
        lo, hi = max(k - neighborhood, 0), min(k + neighborhood + 1, len(self))
        return float(self.power_dbm[lo:hi].max())

    def power_w(self) -> np.ndarray:
        return 10.0 ** (self.power_dbm / 10.0) * 1e-3

    def total_power_w(self) -> float:
        """Band power summed over all bins, corrected by the window ENBW."""
        return float(self.power_w().sum() / self.enbw_bins)

    def rows(self):
        return zip(self.bin_freqs_hz.tolist(), self.power_dbm.tolist())


@dataclass(frozen=True)
class BandInfo:
    index: int
    range_low_hz: float
    range_high_hz: float
    band_name: str
    abbreviation: str
    utilization: str
    range_text: str

    def contains(self, freq_hz: float) -> bool:
        return self.range_low_hz <= freq_hz < self.range_high_hz

    def describe(self) -> str:
        return f"{self.abbreviation} ({self.band_name}) {self.range_text}"


BANDS: tuple[BandInfo, ...] = (
    BandInfo(1, 3e3, 30e3, "Very Low Frequency", "VLF",
             "Navigation, submarine communication", "3–30 kHz"),
    BandInfo(2, 30e3, 300e3, "Low Frequency", "LF",
             "Navigation, submarine communication", "30–300 kHz"),
    BandInfo(3, 300e3, 3e6, "Medium Frequency", "MF",
             "Maritime radio, direction radio, emergency frequency, commercial AM broadcast",
             "300–3000 kHz"),
    BandInfo(4, 3e6, 30e6, "High Frequency", "HF",
             "Amateur radio, international broadcasts, long-distance ship and air craft "
             "communications, telephone, telegram and faximile", "3–30 MHz"),
    BandInfo(5, 30e6, 300e6, "Very High Frequency", "VHF",
             "TV broadcast, commercial FM broadcast, AM air craft communication", "30–300 MHz"),
    BandInfo(6, 300e6, 3e9, "Ultra High Frequency", "UHF",
             "TV broadcasting, navigation, radar, microwave trajectory", "0.3–3 GHz"),
    BandInfo(7, 3e9, 30e9, "Super High Frequency", "SHF",
             "Satellite communications, radar, microwave trajectory", "3–30 GHz"),
    BandInfo(8, 30e9, 300e9, "Extremely High Frequency", "EHF",
             "Satellite radar, experiment and research", "30–300 GHz"),
)


def _largest_pow2(n: int) -> int:
    return 1 << (int(n).bit_length() - 1)


def measure_spectrum(s: Signal, transform_length: int | None = None) -> Spectrum:
    """Hann-windowed spectrum of the first ``transform_length`` samples.

    ``transform_length`` must be a power of two; it defaults to the largest
    one that fits in the signal.
    """
    check_signal(s)
    n = _largest_pow2(len(s)) if transform_length is None else int(transform_length)
    if n < 2 or n & (n - 1):
        raise MeasurementError(f"transform_length must be a power of two >= 2, got {n}")
    if n > len(s):
        raise MeasurementError(f"transform_length {n} exceeds the {len(s)} available samples")

    window = get_window("hann", n)  # periodic form
    coherent_gain = window.sum()
    enbw = n * np.sum(window ** 2) / coherent_gain ** 2

    spectrum = np.fft.rfft(s.samples[:n] * window)
    amplitude = np.abs(spectrum) / coherent_gain
    amplitude[1:] *= 2.0
    if n % 2 == 0:
        amplitude[-1] /= 2.0
    # DC and Nyquist bins carry no 1/2 rms factor
    power_w = amplitude ** 2 / (2 * REFERENCE_IMPEDANCE_OHMS)
    power_w[0] *= 2.0
    power_w[-1] *= 2.0
    with np.errstate(divide="ignore"):
        dbm = 10.0 * np.log10(power_w / 1e-3)
    dbm = np.maximum(dbm, FLOOR_DBM)
    freqs = np.fft.rfftfreq(n, d=1.0 / s.sample_rate_hz)
    return Spectrum(freqs, dbm, s.sample_rate_hz / n, "hann", float(enbw))


def peak_power_dbm(spec: Spectrum) -> tuple[float, float]:
    """Frequency and level of the strongest bin (ties go to the lower bin)."""
    if len(spec) == 0:
        raise MeasurementError("empty spectrum")
    k = int(np.argmax(spec.power_dbm))
    return float(spec.bin_freqs_hz[k]), float(spec.power_dbm[k])


def suppression_db(spec: Spectrum, ref_freq_hz: float, probe_freq_hz: float, neighborhood: int = 2) -> float:
    """Level of the reference line minus the strongest bin near the probe."""
    ref = float(spec.power_dbm[spec.nearest_bin(ref_freq_hz)])
    return ref - spec.level_at(probe_freq_hz, neighborhood)


def zero_crossings(s: Signal) -> tuple[np.ndarray, np.ndarray]:
    """Interpolated times (s) of rising and falling zero crossings."""
    x = s.samples
    prev, cur = x[:-1], x[1:]
    rising = np.flatnonzero((prev < 0) & (cur >= 0))
    falling = np.flatnonzero((prev >= 0) & (cur < 0))

    def interp(idx):
        frac = prev[idx] / (prev[idx] - cur[idx])
        return (idx + frac) / s.sample_rate_hz

    return interp(rising), interp(falling)


def count_frequency(s: Signal) -> float:
    """Counter reading from a least-squares fit over rising zero crossings."""
    check_signal(s)
    rising, falling = zero_crossings(s)
    if rising.size + falling.size < MIN_ZERO_CROSSINGS or rising.size < 2:
        raise MeasurementError(
            f"only {rising.size + falling.size} zero crossings; need {MIN_ZERO_CROSSINGS}"
        )
    cycles = np.arange(rising.size, dtype=np.float64)
    period = np.polyfit(cycles, rising, 1)[0]
    return float(1.0 / period)


def vpp(s: Signal) -> float:
    check_signal(s)
    return float(s.samples.max() - s.samples.min())


def classify_band(freq_hz: float) -> BandInfo:
    for band in BANDS:
        if band.contains(freq_hz):
            return band
    raise MeasurementError(
        f"{freq_hz} Hz is outside the allocation table ({BANDS[0].range_low_hz:g} Hz to "
        f"{BANDS[-1].range_high_hz:g} Hz)"
    )


def vrms_to_dbm(vrms: float) -> float:
    return 10.0 * np.log10(vrms ** 2 / REFERENCE_IMPEDANCE_OHMS / 1e-3)
