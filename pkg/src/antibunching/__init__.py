"""Higher-order antibunching criterion and short-time four-wave-mixing analysis."""

__version__ = "0.1.0"
