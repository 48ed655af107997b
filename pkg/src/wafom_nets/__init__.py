"""wafom-nets - digital nets over Z_b with Walsh figure of merit and error bounds."""

__version__ = "0.1.0"
