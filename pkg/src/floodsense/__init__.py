"""Detect and map localized flood events from streams of short social-media messages."""

__version__ = "0.1.0"
