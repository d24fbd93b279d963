"""Autonomous error correction of a spin-5/2 qudit logical qubit coupled to a phonon mode."""

__version__ = "0.1.0"
