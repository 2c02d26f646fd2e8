"""Detect hand-held phone use in frontal driver images."""

__version__ = "0.1.0"
