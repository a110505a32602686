"""Mining, selecting and checking best-practice Declare constraints."""

__version__ = "0.1.0"
