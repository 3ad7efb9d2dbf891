"""Multiterminal rate-distortion: regions, information spectra and a random-binning simulator."""

__version__ = "0.1.0"
