"""Relation-guided context pooling for knowledge graph queries."""

__version__ = "0.1.0"
