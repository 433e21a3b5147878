"""Bibliographic search and recommendation engine.

First-order fielded text search over an inverted index, citation and
co-read graph queries, composable second-order operators, and usage
analytics, exposed through an HTTP+JSON service and a CLI.
"""

__version__ = "0.1.0"
