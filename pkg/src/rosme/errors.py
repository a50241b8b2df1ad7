"""Exception types shared across the benchmark packages."""

from __future__ import annotations


class RosmeError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(RosmeError):
    """A world file (or other structured input) is syntactically malformed."""


class ValidationError(RosmeError):
    """A parsed artifact violates a structural invariant (names the offender)."""


class UnknownClass(RosmeError):
    """A class label is absent from the taxonomy in use."""


class Unreachable(RosmeError):
    """No path through free cells connects start and goal."""


class Exhausted(RosmeError):
    """The frontier policy found no reachable frontier left to visit."""


class NoFreeSpace(RosmeError):
    """No known free cell is available to sample a target from."""


class EmptyWorld(RosmeError):
    """A metric was evaluated against a groundtruth with zero objects."""


class FrameMismatch(RosmeError):
    """Two semantic maps do not share a reference frame."""


class CorruptLog(RosmeError):
    """An event log could not be replayed; carries the offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"{message} (line {line})")
        self.line = line
