"""Variable-length quantum codes: Kraft sums, condensation, truncation compression."""

__version__ = "0.1.0"
