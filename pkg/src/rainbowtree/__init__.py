"""Rainbow spanning trees in the colored Erdős–Rényi process."""

__version__ = "0.1.0"
