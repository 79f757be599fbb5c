"""Exception types shared across the package."""


class CableDegError(Exception):
    """Base class for all errors raised by this package."""


class WordSyntaxError(CableDegError):
    """A word-file line does not match the word grammar."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}"
            if column is not None:
                where += f", column {column}"
            where += ")"
        super().__init__(message + where)


class ChainError(CableDegError):
    """Consecutive symbols of a cable word do not chain."""


class MissingVolumeError(CableDegError):
    """A reduced term references a region with no volume entry."""


class MeshFormatError(CableDegError):
    """A mesh or curve file could not be parsed."""


class DegenerateCrossing(CableDegError):
    """A cable or ray hits the surface too close to an edge, vertex, or
    tangentially; callers may jitter and retry."""

    def __init__(self, message, segment=None, triangle=None):
        self.segment = segment
        self.triangle = triangle
        super().__init__(message)


class RetriesExhausted(CableDegError):
    """Every jittered retry produced a degenerate crossing."""


class SamplingError(CableDegError):
    """A region sample point could not be placed in a labeled voxel."""


class WindingGuardError(CableDegError):
    """A winding value is too far from an integer to round safely."""
