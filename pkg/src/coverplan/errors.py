"""Exception types shared across the planner."""


class PlanningError(Exception):
    """Base class for all planner errors."""


class Timeout(PlanningError):
    """Deadline expired before the search produced a result."""


class NoPath(PlanningError):
    """The search exhausted its frontier without reaching the goal."""


class DegeneratePath(PlanningError):
    """A path with a single state cannot seed a refinement schedule."""


class DescentStalled(PlanningError):
    """Greedy navigation descent found no strictly improving move."""


class BoundExceeded(PlanningError):
    """Greedy descent ran past its recorded step bound."""


class HomeInvalid(PlanningError):
    """The scenario's home configuration is invalid."""


class GoalUncovered(PlanningError):
    """The queried goal belongs to no region cover entry."""


class StartNotPotential(PlanningError):
    """The query start state is not a known potential state."""


class StaleLibrary(PlanningError):
    """A library lookup no longer matches the environment it was built for."""


class FingerprintMismatch(PlanningError):
    """Library was built for a different scenario."""


class CorruptLibrary(PlanningError):
    """Library file is unreadable or structurally broken."""


class LibraryVersionError(PlanningError):
    """Library file uses an unsupported format version."""


class ScenarioFormatError(PlanningError):
    """Scenario file is unreadable or structurally broken."""


class NotFittedError(PlanningError):
    """Estimator method called before fit()."""
