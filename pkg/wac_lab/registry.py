"""Global suite registry mapping suite names to runner functions."""

from typing import Callable, Dict, List, Optional

# Global registry mapping suite names to runners
_suite_registry: Dict[str, Callable] = {}


def register_suite(name: str, runner: Callable) -> None:
    """
    Register a suite runner in the global registry.

    Args:
        name: Suite name as used in configuration files and on the command line
        runner: Callable taking (S, T, config) and returning a SuiteOutcome
    """
    _suite_registry[name] = runner


def suite(name: str) -> Callable[[Callable], Callable]:
    """Decorator form of register_suite."""

    def decorator(runner: Callable) -> Callable:
        register_suite(name, runner)
        return runner

    return decorator


def get_suite(name: str) -> Optional[Callable]:
    """
    Get a suite runner from the registry by name.

    Args:
        name: Suite name

    Returns:
        Runner if registered, None otherwise
    """
    return _suite_registry.get(name)


def registered_suites() -> List[str]:
    return sorted(_suite_registry)


def clear_registry() -> None:
    """Clear the suite registry (mainly for testing)."""
    _suite_registry.clear()
