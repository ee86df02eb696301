"""Warped time-frequency analysis toolkit."""

__version__ = "0.1.0"
