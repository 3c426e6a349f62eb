"""Utility functions for paths, seeds and disjoint sets."""
