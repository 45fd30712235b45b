"""cotdr: correlation-OTDR laboratory for fiber monitoring experiments."""

__version__ = "0.1.0"
