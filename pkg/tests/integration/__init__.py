"""Integration tests for wac-lab."""
