"""Frobenius traces over curve families and the averaged Lang-Trotter / Sato-Tate predictions."""

__version__ = "0.1.0"
