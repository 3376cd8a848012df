"""Toolkit for weighted discrete p-Hardy inequalities with sharp remainders."""

__version__ = "0.1.0"
