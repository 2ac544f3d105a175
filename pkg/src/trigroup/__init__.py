"""Laboratory for the random triangular group Gamma(n, p)."""

__version__ = "0.1.0"
