"""Exact multi-query temporal motif mining.

Builds a Motif-Group Tree over a set of query motifs and co-mines all of them
in one shared search over a timestamped directed graph.
"""

__version__ = "0.1.0"
