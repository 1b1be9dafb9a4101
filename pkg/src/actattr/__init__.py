"""Perception-action programs for embodied attribute detection in a simulated scene."""

__version__ = "0.1.0"
