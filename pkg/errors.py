from __future__ import annotations

from typing import Iterable


class GContractionError(Exception):
    """Base class for every error raised by the toolkit."""


class InputError(GContractionError, ValueError):
    pass


class DomainError(InputError):
    pass


class PreconditionError(GContractionError):
    pass


class UnsupportedCommandError(GContractionError):
    pass


class EnumerationBudgetError(GContractionError):
    def __init__(self, carrier_size: int, map_count: int, budget: int) -> None:
        self.carrier_size = carrier_size
        self.map_count = map_count
        self.budget = budget
        super().__init__(
            f"Enumeration refused: |X|={carrier_size} gives {map_count} self-maps, budget is {budget}."
        )


class InternalConsistencyError(GContractionError, RuntimeError):
    """A theorem-licensed verdict disagrees with an orbit probe."""


class ConfigError(GContractionError):
    def __init__(self, diagnostics: Iterable[str]) -> None:
        self.diagnostics = list(diagnostics)
        summary = "; ".join(self.diagnostics) if self.diagnostics else "invalid configuration"
        super().__init__(summary)
