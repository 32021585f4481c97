"""Exception hierarchy shared by every module."""


class HyperstabError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(HyperstabError):
    """Malformed graph or tree file."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class GraphValidationError(HyperstabError):
    """A graph or tree violates its structural invariants."""


class PreconditionError(HyperstabError):
    """An operation was called outside its stated precondition."""


class BudgetExceeded(HyperstabError):
    """A search would exceed (or did exceed) its node budget."""

    def __init__(self, message, needed=None, budget=None):
        super().__init__(message)
        self.needed = needed
        self.budget = budget


class OverlapError(HyperstabError):
    """Two partial embeddings overlap outside their shared anchor."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class EmbedFailure(HyperstabError):
    """A tree embedding procedure got stuck.

    ``partial`` holds the partial map (tree vertex -> host vertex) at the
    point of failure, ``stage`` names the step that starved.
    """

    def __init__(self, message, partial=None, stage=None, report=None):
        super().__init__(message)
        self.partial = dict(partial or {})
        self.stage = stage
        self.report = [report] if isinstance(report, dict) else list(report or [])


class ConstructionFailure(HyperstabError):
    """A randomized or desk-scale construction did not land.

    ``diagnostics`` is a list of per-attempt dicts.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = [diagnostics] if isinstance(diagnostics, dict) else list(diagnostics or [])


class HierarchyError(HyperstabError):
    """Parameter ordering violated while strict hierarchy checking is on."""
