"""Exact reference solvers for the cardinality-constrained model."""
