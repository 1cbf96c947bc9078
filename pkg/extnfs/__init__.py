"""Desk-scale ExTNFS discrete logarithm pipeline for F_{p^4}."""

__version__ = "0.3.0"
