"""Bundled data files (indicator code map)."""
