"""Shared store for the per-criterion lines printed at the end of a pytest run."""
ACCEPTANCE_LINES = []
