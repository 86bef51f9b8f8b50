"""Exception hierarchy. Everything the library raises on purpose is a FormationError."""
from typing import Optional


class FormationError(Exception):
    pass


class CoincidentAgents(FormationError):
    """Two agents joined by an edge sit on top of each other (bearing undefined)."""

    def __init__(self, message: str, edge: Optional[int] = None, agent: Optional[int] = None):
        super().__init__(message)
        self.edge = edge    # 1-based edge index, when known
        self.agent = agent  # 1-based agent index, when known


class ZeroVector(FormationError):
    pass


class DimensionMismatch(FormationError):
    pass


class SingularProjectionSum(FormationError):
    """Sum of target projections is not invertible: target bearings all parallel."""


class DegenerateBearings(FormationError):
    pass


class NotOrderedLFF(FormationError):
    pass


class NotOneToMany(FormationError):
    pass


class InconsistentConfiguration(FormationError):
    pass


class EmptyTrajectory(FormationError):
    pass


class UnknownScenario(FormationError):
    pass


class NotSubgraph(FormationError):
    pass


class MismatchedTargets(FormationError):
    pass


class ControlAssemblyError(FormationError):
    """Per-agent and matrix forms of the control law disagree."""


class ParseError(FormationError):
    def __init__(self, message: str, path: Optional[str] = None,
                 line: Optional[int] = None, column: Optional[int] = None):
        where = f"{path}:{line}:{column}: " if path and line else ""
        super().__init__(where + message)
        self.path = path
        self.line = line
        self.column = column


class ScenarioValidationError(FormationError):
    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


class IoError(FormationError):
    pass
