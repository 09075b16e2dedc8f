"""Discrete-time model of a Bitx-style bidirectional SSB transceiver."""

__version__ = "0.1.0"
