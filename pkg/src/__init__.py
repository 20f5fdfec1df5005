"""Pacote principal do projeto replay-watermark."""

__version__ = "0.1.0"
