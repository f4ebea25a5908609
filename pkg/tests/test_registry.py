"""Tests for the suite registry."""

import pytest

import wac_lab.experiment  # noqa: F401
from wac_lab import registry
from wac_lab.config import SUITES
from wac_lab.registry import (
    clear_registry,
    get_suite,
    register_suite,
    registered_suites,
    suite,
)


@pytest.fixture
def saved_registry():
    """Restore the global registry after a test mutates it."""
    saved = dict(registry._suite_registry)
    yield
    registry._suite_registry.clear()
    registry._suite_registry.update(saved)


class TestRegistry:
    """Test suite registration."""

    def test_builtin_suites(self):
        """Test that every configured suite has a runner."""
        assert registered_suites() == sorted(SUITES)

    def test_register_and_get(self, saved_registry):
        """Test registering a runner by name."""

        def runner(config, index):
            return None

        register_suite("custom", runner)
        assert get_suite("custom") is runner

    def test_decorator(self, saved_registry):
        """Test the decorator form."""

        @suite("decorated")
        def runner(config, index):
            return None

        assert get_suite("decorated") is runner

    def test_unknown(self):
        """Test that an unknown name has no runner."""
        assert get_suite("nonexistent") is None

    def test_clear(self, saved_registry):
        """Test clearing the registry."""
        clear_registry()
        assert registered_suites() == []
