"""Sampling constants for dominating sets in weighted Bergman and Fock spaces."""

__version__ = "0.1.0"

SCHEMA_VERSION = 1
