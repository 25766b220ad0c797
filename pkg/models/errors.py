# models/errors.py
from typing import Optional


class HubwayError(Exception):
    """Base class for every error raised by the hubway pipeline."""


class GraphError(HubwayError, ValueError):
    """Input graph violates a structural requirement (connectivity, edge lengths)."""


class GraphFormatError(GraphError):
    """ Edge-list text could not be parsed. """
    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class SizeGuardError(HubwayError, ValueError):
    """An exact (exponential-time) routine was called on an instance that is too large."""


class WidthCapExceeded(HubwayError, RuntimeError):
    def __init__(self, width: int, cap: int):
        self.width = width
        self.cap = cap
        super().__init__(f"width cap exceeded: width {width} > cap {cap}")


class MissingCoreHubs(HubwayError, RuntimeError):
    def __init__(self, town_id: int):
        self.town_id = town_id
        super().__init__(f"missing core hubs in town {town_id} with at least two children")


class StateBudgetExceeded(HubwayError, RuntimeError):
    """ A DP table would grow past its state budget. """
    def __init__(self, states: int, budget: int):
        self.states = states
        self.budget = budget
        super().__init__(f"state budget exceeded: {states} states > budget {budget}")


class StructuralViolation(HubwayError, AssertionError):
    """A structural property the construction guarantees did not hold."""
