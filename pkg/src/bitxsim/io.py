"""Config files, spectrum CSV, audio text files and run manifests."""

from __future__ import annotations

import dataclasses
import json
import os
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .chain import TransceiverConfig
from .instruments import Spectrum
from .oscillators import OscillatorSpec
from .signal import FilterSpec, Signal

CONFIG_DIR_ENV = "BITX_CONFIG_DIR"
DEFAULT_CONFIG_NAME = "default.cfg"

_NESTED = {
    "bfo": OscillatorSpec,
    "vfo": OscillatorSpec,
    "ssb_filter": FilterSpec,
    "bpf": FilterSpec,
}


class ConfigParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _config_keys() -> dict[str, type]:
    """Flat key -> python type, in file order."""
    keys = {}
    for f in dataclasses.fields(TransceiverConfig):
        if f.name in _NESTED:
            for sub in dataclasses.fields(_NESTED[f.name]):
                keys[f"{f.name}_{sub.name}"] = float
        elif f.name == "bpf_enabled":
            keys[f.name] = bool
        elif f.name == "sideband":
            keys[f.name] = str
        else:
            keys[f.name] = float
    return keys


CONFIG_KEYS = _config_keys()


def _parse_value(raw: str, kind: type, line: int):
    if kind is bool:
        low = raw.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ConfigParseError(line, f"expected a boolean, got {raw!r}")
    if kind is str:
        return raw
    try:
        return float(raw)
    except ValueError:
        raise ConfigParseError(line, f"expected a number, got {raw!r}") from None


def config_from_mapping(values: dict) -> TransceiverConfig:
    kwargs = {}
    for f in dataclasses.fields(TransceiverConfig):
        if f.name in _NESTED:
            cls = _NESTED[f.name]
            sub = {s.name: values[f"{f.name}_{s.name}"] for s in dataclasses.fields(cls)}
            kwargs[f.name] = cls(**sub)
        else:
            kwargs[f.name] = values[f.name]
    return TransceiverConfig(**kwargs)


def config_to_mapping(config: TransceiverConfig) -> dict:
    out = {}
    for f in dataclasses.fields(TransceiverConfig):
        value = getattr(config, f.name)
        if f.name in _NESTED:
            for s in dataclasses.fields(value):
                out[f"{f.name}_{s.name}"] = getattr(value, s.name)
        else:
            out[f.name] = value
    return out


def parse_config(text: str) -> TransceiverConfig:
    """Parse ``key = value`` lines. Every key is required; ``#`` starts a comment."""
    values: dict = {}
    last_line = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        last_line = lineno
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigParseError(lineno, f"expected 'key = value', got {body!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigParseError(lineno, f"unknown key {key!r}")
        if key in values:
            raise ConfigParseError(lineno, f"duplicate key {key!r}")
        if not raw:
            raise ConfigParseError(lineno, f"missing value for {key!r}")
        values[key] = _parse_value(raw, CONFIG_KEYS[key], lineno)
    missing = [k for k in CONFIG_KEYS if k not in values]
    if missing:
        raise ConfigParseError(last_line, f"missing keys: {', '.join(missing)}")
    try:
        return config_from_mapping(values)
    except ValueError as exc:
        raise ConfigParseError(last_line, str(exc)) from None


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(config: TransceiverConfig) -> str:
    lines = [f"{key} = {_format_value(value)}" for key, value in config_to_mapping(config).items()]
    return "\n".join(lines) + "\n"


def load_config(path) -> TransceiverConfig:
    """Read a ``.cfg`` file, or the config embedded in a run manifest (``.json``)."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        return config_from_mapping(json.loads(text)["config"])
    return parse_config(text)


def default_config_text() -> str:
    env_dir = os.environ.get(CONFIG_DIR_ENV)
    if env_dir:
        candidate = Path(env_dir) / DEFAULT_CONFIG_NAME
        if candidate.is_file():
            return candidate.read_text(encoding="utf-8")
    return resources.files("bitxsim.data").joinpath(DEFAULT_CONFIG_NAME).read_text(encoding="utf-8")


def load_default_config() -> TransceiverConfig:
    return parse_config(default_config_text())


# -- data files ----------------------------------------------------------------


def format_spectrum_csv(spec: Spectrum) -> str:
    rows = ["freq_hz,power_dbm"]
    rows.extend(f"{f:.6f},{p:.6f}" for f, p in spec.rows())
    return "\n".join(rows) + "\n"


def write_spectrum_csv(spec: Spectrum, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_spectrum_csv(spec))


def read_spectrum_csv(path) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1]


def read_audio_text(path, sample_rate_hz: float) -> Signal:
    """Headerless text file, one sample (volts) per line."""
    return Signal(np.loadtxt(path, ndmin=1), sample_rate_hz)


def write_audio_text(s: Signal, path) -> None:
    np.savetxt(path, s.samples, fmt="%.9e")


def build_manifest(command: str, config: TransceiverConfig, inputs: dict, outputs: dict) -> dict:
    return {
        "command": command,
        "config": config_to_mapping(config),
        "input": inputs,
        "outputs": {k: str(v) for k, v in outputs.items()},
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def write_manifest(manifest: dict, path) -> None:
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
