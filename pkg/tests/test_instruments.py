import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bitxsim.instruments import (
    BANDS,
    FLOOR_DBM,
    MeasurementError,
    classify_band,
    count_frequency,
    measure_spectrum,
    peak_power_dbm,
    suppression_db,
    vpp,
)
from bitxsim.signal import Signal, add, make_tone, mean_square, scale_db

from oracles import dft_matrix_power_dbm

FS = 40e6


def bin_centre(k, n=2 ** 16, fs=FS):
    return k * fs / n


class TestMeasureSpectrum:
    def test_zero_dbm_reference(self):
        # 0.6325 Vpp -> Vrms = 0.2236 V -> 0.2236^2 / 50 = 1.000 mW
        s = make_tone(bin_centre(5000), 0.6325, 2 ** 16 / FS, FS)
        spec = measure_spectrum(s)
        f, p = peak_power_dbm(spec)
        assert f == bin_centre(5000)
        assert p == pytest.approx(0.0, abs=0.1)

    def test_shape(self):
        spec = measure_spectrum(make_tone(1e6, 1.0, 1e-3, FS), 1024)
        assert len(spec) == 513
        assert spec.resolution_hz == FS / 1024
        assert spec.bin_freqs_hz[-1] == FS / 2
        assert np.all(np.diff(spec.bin_freqs_hz) > 0)

    def test_zero_signal_floor(self):
        spec = measure_spectrum(Signal.zeros(4096, FS))
        assert np.all(spec.power_dbm <= FLOOR_DBM)

    def test_two_tones_match_dft_matrix(self):
        n, fs = 1024, 1e6
        s = add(make_tone(100 * fs / n, 0.5, n / fs, fs), make_tone(300.5 * fs / n, 0.05, n / fs, fs))
        spec = measure_spectrum(s, n)
        _, oracle = dft_matrix_power_dbm(s.samples, fs)
        keep = oracle > -100
        np.testing.assert_allclose(spec.power_dbm[keep], oracle[keep], atol=1e-6)
        assert spec.level_at(100 * fs / n) - spec.level_at(300.5 * fs / n, 1) == pytest.approx(20.0, abs=1.5)

    def test_rejects_bad_length(self):
        s = make_tone(1e6, 1.0, 1e-4, FS)
        with pytest.raises(MeasurementError):
            measure_spectrum(s, 8192)
        with pytest.raises(MeasurementError):
            measure_spectrum(s, 1000)

    @given(st.floats(100e3, 19e6), st.floats(0.01, 5.0), st.floats(0, 6.28))
    @settings(max_examples=40, deadline=None)
    def test_parseval(self, f, a, ph):
        n = 2 ** 14
        s = make_tone(f, a, n / FS, FS, ph)
        spec = measure_spectrum(s, n)
        time_w = mean_square(s) / 50.0
        assert 10 * np.log10(spec.total_power_w() / time_w) == pytest.approx(0.0, abs=0.1)


class TestCounter:
    @pytest.mark.parametrize("f", [1e3, 3.2e6, 6.8e6, 10e6])
    def test_one_ppm(self, f):
        assert abs(count_frequency(make_tone(f, 1.0, 20e-3, FS)) - f) <= 1e-6 * f

    def test_bfo_reading(self):
        assert count_frequency(make_tone(10e6, 0.226, 10e-3, FS)) == pytest.approx(10e6, abs=10)

    def test_vfo_reading(self):
        assert count_frequency(make_tone(3.19936e6, 0.158, 10e-3, FS)) == pytest.approx(3.19936e6, abs=4)

    def test_constant_rejected(self):
        with pytest.raises(MeasurementError):
            count_frequency(Signal(np.full(1000, 0.3), FS))


class TestVpp:
    @pytest.mark.parametrize("amp", [0.113, 0.079])
    def test_bench_levels(self, amp):
        assert vpp(make_tone(10e6, 2 * amp, 1e-5, FS)) == pytest.approx(2 * amp, abs=1e-12)

    def test_zeros(self):
        assert vpp(Signal.zeros(10, FS)) == 0.0

    @given(st.floats(-40, 40))
    def test_scales_with_gain(self, g):
        s = make_tone(1e3, 1.0, 1e-2, 48e3)
        assert vpp(scale_db(s, g)) == pytest.approx(vpp(s) * 10 ** (g / 20), rel=1e-9)


class TestPeakAndSuppression:
    def test_tie_goes_low(self):
        spec = measure_spectrum(Signal.zeros(256, FS))
        assert peak_power_dbm(spec) == (0.0, FLOOR_DBM)

    def test_same_frequency_is_zero(self):
        spec = measure_spectrum(make_tone(bin_centre(3000), 1.0, 2 ** 16 / FS, FS))
        assert suppression_db(spec, bin_centre(3000), bin_centre(3000)) == 0.0

    def test_two_tone_suppression(self):
        s = add(make_tone(bin_centre(3000), 1.0, 2 ** 16 / FS, FS), make_tone(bin_centre(3100), 0.01, 2 ** 16 / FS, FS))
        spec = measure_spectrum(s)
        assert suppression_db(spec, bin_centre(3000), bin_centre(3100)) == pytest.approx(40.0, abs=0.01)

    def test_out_of_range(self):
        spec = measure_spectrum(make_tone(1e6, 1.0, 1e-4, FS))
        with pytest.raises(MeasurementError):
            suppression_db(spec, 1e6, 30e6)


class TestBands:
    def test_table_shape(self):
        assert len(BANDS) == 8
        assert BANDS[0].range_low_hz == 3e3 and BANDS[-1].range_high_hz == 300e9
        for lower, upper in zip(BANDS, BANDS[1:]):
            assert lower.range_high_hz == upper.range_low_hz

    def test_forty_metres(self):
        band = classify_band(7e6)
        assert band.index == 4 and band.abbreviation == "HF"
        assert band.utilization.startswith("Amateur radio, international broadcasts")

    def test_boundary_goes_up(self):
        assert classify_band(300e3).abbreviation == "MF"
        assert classify_band(299_999.9).abbreviation == "LF"

    @pytest.mark.parametrize("f", [1.0, 2999.0, 300e9, 1e12])
    def test_outside(self, f):
        with pytest.raises(MeasurementError):
            classify_band(f)

    @given(st.floats(3e3, 300e9, exclude_max=True))
    def test_total_and_single_valued(self, f):
        hits = [b for b in BANDS if b.contains(f)]
        assert len(hits) == 1
        assert classify_band(f) is hits[0]
