"""Command-line bench: ``bitxsim tx|rx|roundtrip|measure|bands``.

Failures print one line to stderr, ``error: <code>: <detail>``, and exit
nonzero (1 measurement failed, 2 bad input, 3 configuration invariant).
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import warnings
from pathlib import Path

from . import __version__, instruments
from .chain import (
    ConfigError,
    TransceiverConfig,
    analyze_audio,
    build_chain,
    run_rx,
    run_tx,
)
from .io import (
    ConfigParseError,
    build_manifest,
    load_config,
    load_default_config,
    read_audio_text,
    write_audio_text,
    write_manifest,
    write_spectrum_csv,
)
from .oscillators import generate
from .signal import make_tone
from .stages import StageKind

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_INVARIANT = 0, 1, 2, 3
OSCILLATOR_TARGETS = ("bfo", "vfo")
RX_TARGETS = (StageKind.DETECTOR.value, StageKind.AF_AMP.value)
TX_TARGETS = tuple(k.value for k in StageKind if k.value not in RX_TARGETS)
MEASURE_TARGETS = OSCILLATOR_TARGETS + TX_TARGETS + RX_TARGETS


class CliError(Exception):
    def __init__(self, code: int, reason: str, detail: str):
        super().__init__(f"error: {reason}: {detail}")
        self.code = code


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def _summary(**fields) -> str:
    return " ".join(f"{k}={_fmt(v) if isinstance(v, float) else v}" for k, v in fields.items())


def _resolve_config(args) -> TransceiverConfig:
    try:
        config = load_default_config() if args.config is None else load_config(args.config)
    except FileNotFoundError:
        raise CliError(EXIT_INPUT, "config-missing", f"no such file {args.config}") from None
    except ConfigParseError as exc:
        raise CliError(EXIT_INPUT, "config-parse", str(exc)) from None
    except (KeyError, ValueError) as exc:
        raise CliError(EXIT_INPUT, "config-parse", f"line 0: {exc}") from None
    overrides = {}
    if getattr(args, "duration_ms", None) is not None:
        overrides["duration_s"] = args.duration_ms / 1e3
    if getattr(args, "no_bpf", False):
        overrides["bpf_enabled"] = False
    config = dataclasses.replace(config, **overrides)
    try:
        return config.check()
    except ConfigError as exc:
        raise CliError(EXIT_INVARIANT, f"invariant {exc.invariant}", str(exc)) from None


def _tone(config: TransceiverConfig, tone_hz: float):
    try:
        return make_tone(tone_hz, 1.0, config.duration_s, config.sample_rate_hz)
    except ValueError as exc:
        raise CliError(EXIT_INVARIANT, "invariant audio_in_band", str(exc)) from None


def _write_outputs(args, command, config, inputs, spectrum) -> None:
    if args.out is None:
        return
    write_spectrum_csv(spectrum, args.out)
    manifest_path = args.manifest or f"{args.out}.manifest.json"
    write_manifest(build_manifest(command, config, inputs, {"spectrum": args.out}), manifest_path)


def cmd_tx(args) -> int:
    config = _resolve_config(args)
    lo, hi = config.passable_audio_band()
    if not lo <= args.tone <= hi:
        raise CliError(
            EXIT_INVARIANT, "invariant audio_in_band",
            f"tone {args.tone:g} Hz outside the passable {lo:g}-{hi:g} Hz band",
        )
    registry = build_chain(config)
    rf = run_tx(registry, config, _tone(config, args.tone))
    spectrum = instruments.measure_spectrum(rf)
    peak_hz, peak_dbm = instruments.peak_power_dbm(spectrum)
    line_hz = config.emission_hz(args.tone)
    mirror_hz = 2 * config.carrier_hz - line_hz
    _write_outputs(args, "tx", config, {"tone_hz": args.tone}, spectrum)
    print(_summary(
        peak_hz=peak_hz,
        peak_dbm=peak_dbm,
        carrier_suppression_db=instruments.suppression_db(spectrum, line_hz, config.carrier_hz),
        sideband_suppression_db=instruments.suppression_db(spectrum, line_hz, mirror_hz),
    ))
    return EXIT_OK


def _rx_input(args, config):
    if args.input is not None:
        return read_audio_text(args.input, config.sample_rate_hz), {"rf_path": str(args.input)}
    rf_hz = config.emission_hz(args.tone)
    return (
        make_tone(rf_hz, args.level_vpp, config.duration_s, config.sample_rate_hz),
        {"rf_tone_hz": rf_hz, "rf_level_vpp": args.level_vpp},
    )


def cmd_rx(args) -> int:
    config = _resolve_config(args)
    rf, inputs = _rx_input(args, config)
    if rf.sample_rate_hz != config.sample_rate_hz:
        raise CliError(EXIT_INPUT, "rf-input", "sample rate mismatch")
    audio = run_rx(build_chain(config), config, rf)
    reading = analyze_audio(audio)
    _write_outputs(args, "rx", config, inputs, instruments.measure_spectrum(audio))
    if args.audio_out:
        write_audio_text(audio, args.audio_out)
    print(_summary(recovered_hz=reading.freq_hz, snr_db=reading.snr_db))
    return EXIT_OK


def cmd_roundtrip(args) -> int:
    config = _resolve_config(args)
    registry = build_chain(config)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rf = run_tx(registry, config, _tone(config, args.tone))
    reading = analyze_audio(run_rx(registry, config, rf))
    tolerance = 2.0 / config.duration_s
    line = _summary(recovered_hz=reading.freq_hz, snr_db=reading.snr_db, tolerance_hz=tolerance)
    if reading.snr_db >= 30.0 and abs(reading.freq_hz - args.tone) <= tolerance:
        print(line)
        return EXIT_OK
    print(f"error: roundtrip-failed: {line}", file=sys.stderr)
    return EXIT_FAIL


def cmd_measure(args) -> int:
    if args.target not in MEASURE_TARGETS:
        raise CliError(EXIT_INPUT, "unknown-target", f"{args.target!r}; valid targets: {', '.join(MEASURE_TARGETS)}")
    config = _resolve_config(args)
    inputs = {"target": args.target}
    if args.target in OSCILLATOR_TARGETS:
        spec = config.bfo if args.target == "bfo" else config.vfo
        tap = generate(spec, config.duration_s, config.sample_rate_hz)
        print(_summary(
            target=args.target,
            counter_hz=instruments.count_frequency(tap),
            vpp_v=instruments.vpp(tap),
        ))
    else:
        registry = build_chain(config)
        inputs["tone_hz"] = args.tone
        taps: dict = {}
        rf = run_tx(registry, config, _tone(config, args.tone), taps)
        if args.target in RX_TARGETS:
            run_rx(registry, config, rf, taps)
        tap = taps[StageKind(args.target)]
        peak_hz, peak_dbm = instruments.peak_power_dbm(instruments.measure_spectrum(tap))
        print(_summary(target=args.target, peak_hz=peak_hz, peak_dbm=peak_dbm))
    _write_outputs(args, "measure", config, inputs, instruments.measure_spectrum(tap))
    return EXIT_OK


def cmd_bands(args) -> int:
    try:
        band = instruments.classify_band(args.freq)
    except instruments.MeasurementError as exc:
        raise CliError(EXIT_FAIL, "out-of-table", str(exc)) from None
    print(f"{band.describe()} | {band.utilization}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bitxsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, tone=True):
        p.add_argument("--config", type=Path, help="config file or run manifest (default: shipped default.cfg)")
        p.add_argument("--duration-ms", type=float, help="override the config buffer length")
        p.add_argument("--no-bpf", action="store_true", help="bypass the output band-pass filter")
        if tone:
            p.add_argument("--tone", type=float, default=1000.0, help="audio test tone in Hz")

    p = sub.add_parser("tx", help="transmit a test tone and analyse the antenna-port spectrum")
    common(p)
    p.add_argument("--out", help="spectrum CSV path")
    p.add_argument("--manifest", help="manifest path (default: <out>.manifest.json)")
    p.set_defaults(func=cmd_tx)

    p = sub.add_parser("rx", help="receive an RF waveform (text file) or an on-channel test tone")
    common(p)
    p.add_argument("--in", dest="input", type=Path, help="RF samples, one per line, at the config rate")
    p.add_argument("--level-vpp", type=float, default=2e-3, help="level of the synthetic RF tone")
    p.add_argument("--out", help="audio spectrum CSV path")
    p.add_argument("--audio-out", help="write demodulated audio samples as text")
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_rx)

    p = sub.add_parser("roundtrip", help="transmit then receive a tone; check frequency and SNR")
    common(p)
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("measure", help="spectrum at an oscillator or stage tap point")
    common(p)
    p.add_argument("--target", required=True, help=f"one of: {', '.join(MEASURE_TARGETS)}")
    p.add_argument("--out")
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("bands", help="look up a frequency in the band allocation table")
    p.add_argument("freq", type=float, help="frequency in Hz")
    p.set_defaults(func=cmd_bands)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
