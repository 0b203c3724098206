"""Typological corpus metrics: subword complexity, word-order entropy, language sampling."""

__version__ = "0.1.0"
