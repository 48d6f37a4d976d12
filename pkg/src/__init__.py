"""netflux - central relaxation schemes for conservation laws on star networks."""

__version__ = "0.1.0"
