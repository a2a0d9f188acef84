"""Constant Lee weight channel over Z_m."""

__version__ = "0.1.0"
