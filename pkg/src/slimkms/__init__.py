"""Scaling limits of distributions, KMS reconstruction kernels and Rindler-wedge checks."""

__version__ = "0.1.0"
