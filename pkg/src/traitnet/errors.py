"""Exception types shared across the package."""

from __future__ import annotations


class ModelError(ValueError):
    """A variable, table, or network definition violates a structural rule."""


class CycleError(ModelError):
    """The parent relation contains a directed cycle.

    ``cycle`` holds the vertex names of one offending cycle, in edge
    direction, starting from the lexicographically smallest member.
    """

    def __init__(self, cycle: list[str]):
        self.cycle = list(cycle)
        super().__init__("cycle detected: " + " -> ".join(self.cycle + self.cycle[:1]))


class EvidenceError(ValueError):
    """Evidence or a query names an unknown variable or state."""


class ImpossibleEvidenceError(ValueError):
    """The observed assignment has zero probability under the model."""


class ScoringError(ValueError):
    """A score was requested that the variable's state labels cannot support."""
