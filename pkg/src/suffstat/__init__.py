"""Effect-size profiling and data-sufficiency experiments for tabular
binary classification."""

__version__ = "0.1.0"
