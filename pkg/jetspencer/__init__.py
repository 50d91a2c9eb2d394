"""Exact formal theory of linear systems of partial differential equations."""
