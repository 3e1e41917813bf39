"""Utility helpers: configuration, logging, exceptions, file access."""
