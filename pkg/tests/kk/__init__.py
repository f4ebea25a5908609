"""Tests for the Kasparov product toolkit."""
