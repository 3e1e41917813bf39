"""Difference-of-convex algorithm for the cardinality-constrained model."""
