"""Design and hourly scheduling of Power-to-Methanol plants with optional battery and hydrogen storage."""

__version__ = "0.1.0"
