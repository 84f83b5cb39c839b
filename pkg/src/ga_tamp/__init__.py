"""Dual-arm multi-object assembly planning over grasp and assembly spaces."""

__version__ = "0.1.0"
