"""Synchronization certificates for identical Kuramoto oscillator networks."""

__version__ = "1.0.0"
