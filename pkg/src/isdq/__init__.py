"""Task-level interactivity and diversity scoring for crowd scenarios."""

__version__ = "0.1.0"
