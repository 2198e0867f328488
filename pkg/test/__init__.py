"""Provide tests."""
