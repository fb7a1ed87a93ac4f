"""coordnet: detect and characterize coordinated account networks in tweet corpora."""

__version__ = "0.1.0"
