"""Model and solver selectors used throughout the engine."""

from enum import Enum


class Model(str, Enum):
    """Which phase-field equation a step or run advances."""

    AC = "ac"
    CH = "ch"


class SolverKind(str, Enum):
    EXPLICIT = "explicit"
    IMPLICIT = "implicit"
