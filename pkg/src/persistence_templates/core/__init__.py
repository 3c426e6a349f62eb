"""Numerical core: diagrams, persistence, featurization, learning and data generation."""
