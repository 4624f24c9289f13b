"""Patent classification and time-series econometrics for AI and robot patenting."""

__version__ = "0.1.0"
