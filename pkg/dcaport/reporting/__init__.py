"""Benchmark sweeps and report output."""
