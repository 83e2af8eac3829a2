"""Dual-backend Nepali FAQ chatbot engine."""

__version__ = "0.1.0"
