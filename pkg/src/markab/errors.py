"""Exception hierarchy shared across the package.

The CLI maps each class to a distinct exit code, so library code should
raise the most specific type that applies.
"""


class MarkabError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(MarkabError):
    """A document could not be parsed (bad syntax, unknown fields, bad schema)."""


class ValidationError(MarkabError):
    """A parsed or constructed object violates a semantic invariant."""


class GuardError(MarkabError):
    """A problem size exceeds a guard meant to keep exact computations feasible."""


class CoveringError(MarkabError):
    """A partition failed to cover a concrete state it was asked to classify."""
