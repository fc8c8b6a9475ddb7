"""polyopf - Polynomial-optimization bounds for AC optimal power flow."""

__version__ = "0.1.0"
