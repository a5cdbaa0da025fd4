"""Equilibrium thermodynamics of oscillator networks coupled to a thermal scalar field."""

__version__ = "0.1.0"
