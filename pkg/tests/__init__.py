"""Tests for wac-lab."""
