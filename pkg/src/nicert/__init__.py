"""Non-interference certification for a small Java-like language."""

from .labels import HIGH, LOW, Label, StoredLabel, current, join, update
from .syntax import NIPolicy, ParseError, PolicyError, extract_policy, load, parse

__version__ = "0.1.0"

__all__ = [
    "HIGH", "LOW", "Label", "NIPolicy", "ParseError", "PolicyError", "StoredLabel", "current",
    "extract_policy", "join", "load", "parse", "update",
]
