"""Simulation and analytics for satellite-assisted quantum information networks."""

__version__ = "0.1.0"
