"""Nested CSS LDPC construction and finite-degree GV certification toolkit."""

__version__ = "0.1.0"
