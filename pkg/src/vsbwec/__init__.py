"""Time-domain simulation of flexible-shell (variable-shape) heaving wave energy converters."""

__version__ = "0.1.0"
