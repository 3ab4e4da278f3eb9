"""Retrieval-assisted iterative in-context learning for hierarchical text classification."""

__version__ = "0.1.0"
