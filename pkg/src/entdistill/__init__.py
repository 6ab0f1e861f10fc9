"""Simulation and reconstruction toolkit for photonic entanglement distillation
with a polarization-dependent lossy filter."""

__version__ = "0.1.0"
