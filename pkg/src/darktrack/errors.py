"""Exception hierarchy shared across the toolkit."""


class DarktrackError(Exception):
    """Base class for all toolkit errors."""


class DegenerateRegion(DarktrackError):
    """A box clamped to image bounds covers no pixels."""


class NumericalFailure(DarktrackError):
    """A linear-algebra step hit a singular or ill-conditioned system."""


class InsufficientPoints(DarktrackError):
    """Too few correspondences for the requested estimation."""


class DegenerateConfiguration(DarktrackError):
    """Point configuration is rank-deficient (e.g. all collinear)."""


class PointAtInfinity(DarktrackError):
    """Projective mapping sent a point to the line at infinity."""


class DegenerateSample(DarktrackError):
    """A minimal sample cannot determine the model (collinear sources)."""


class MissingMask(DarktrackError):
    """A tracked frame has no corresponding region mask."""


class MissingGroundTruth(DarktrackError):
    """A ranking query has no ground-truth entry."""


class EmptyGroundTruth(DarktrackError):
    """Metric computation requires at least one ground-truth box."""


class NoLoopConfigured(DarktrackError):
    """Loop ground truth requested from a config without a trajectory."""


class ConfigInvalid(DarktrackError):
    """Simulator configuration violates its invariants."""


class ParseError(DarktrackError):
    """A line-based file failed to parse.

    Carries the 1-based line number where the failure occurred.
    """

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class FormatError(DarktrackError):
    """A binary file (PGM) is malformed or truncated."""


class InvariantViolation(DarktrackError):
    """Parsed data violates a domain-type invariant."""
