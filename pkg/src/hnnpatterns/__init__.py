"""Geodesics and strip patterns in HNN extensions of free abelian groups."""

__version__ = "0.1.0"
