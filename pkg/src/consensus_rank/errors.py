"""Exception types shared across the package.

Every error raised by this package derives from :class:`ConsensusRankError`,
so callers can catch one base class at API boundaries (service, CLI).
"""

from __future__ import annotations


class ConsensusRankError(Exception):
    """Base class for all errors raised by consensus-rank."""


# --- ingest ---------------------------------------------------------------

class MissingHeaderError(ConsensusRankError):
    """CSV source is empty, garbled, or lacks the expected header."""


class DuplicateEntryError(ConsensusRankError):
    """An item appears more than once in a single list or registry."""


class UnknownGradeError(ConsensusRankError):
    """A level token cannot be interpreted under the declared grade order."""


class UnknownItemError(ConsensusRankError):
    """A list references an item that is absent from the registry."""


class UncoveredItemError(ConsensusRankError):
    """A registry item is rated by none of the lists."""


# --- taux -----------------------------------------------------------------

class TooFewItemsError(ConsensusRankError):
    """Fewer than two items are rated across the two lists."""


# --- likelihood / fitting ---------------------------------------------------

class DimensionMismatchError(ConsensusRankError):
    """An ability vector does not match the tally's item count."""


class DisconnectedGraphError(ConsensusRankError):
    """The comparison graph is disconnected; differences are unidentifiable."""

    def __init__(self, message: str, unreachable: tuple[int, ...] = ()):
        super().__init__(message)
        self.unreachable = unreachable


class DivergentEstimateError(ConsensusRankError):
    """An ability estimate exceeded the divergence bound (data separation)."""


class NotConvergedError(ConsensusRankError):
    """An iterative solver hit its iteration cap before reaching tolerance."""


class EmptyPathError(ConsensusRankError):
    """A penalty path contains no successful fit to select from."""


# --- bootstrap --------------------------------------------------------------

class EmptySamplesError(ConsensusRankError):
    """An interval was requested from an empty replicate sample."""


class AllReplicatesFailedError(ConsensusRankError):
    """Every bootstrap replicate failed to refit."""


# --- pipeline ---------------------------------------------------------------

class PipelineError(ConsensusRankError):
    """A pipeline stage failed; carries the stage name and partial artifacts."""

    def __init__(self, stage: str, cause: Exception, partial_artifacts: dict[str, str] | None = None):
        super().__init__(f"pipeline stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.partial_artifacts = dict(partial_artifacts or {})
