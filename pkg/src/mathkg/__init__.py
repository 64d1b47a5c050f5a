"""Math-KG: mathematical knowledge graph construction, faults analysis and
semantic search."""

__version__ = "0.1.0"
