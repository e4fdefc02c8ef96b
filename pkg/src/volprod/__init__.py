"""Polar duality, Santaló points and volume products of convex polytopes."""

__version__ = "0.1.0"
