from __future__ import annotations


class ConfigError(ValueError):
    """Invalid run configuration. Carries every violation found, not just the first."""

    def __init__(self, violations: list[str]) -> None:
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class SimulationError(RuntimeError):
    """Failure while a run is executing (as opposed to while validating its config)."""
