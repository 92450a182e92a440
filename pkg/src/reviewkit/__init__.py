"""Review-assistance toolkit: topic catalogs, similarity fallbacks, sentiment,
phrase suggestion, compose sessions, and evaluation reports."""

__version__ = "0.1.0"
