"""Exception hierarchy shared by every module and mapped to CLI exit codes."""


class FrobError(Exception):
    """Base class for all package errors."""


class DomainError(FrobError, ValueError):
    """An input violates an operation's precondition."""


class EmptyRangeError(DomainError):
    pass


class ReductionError(DomainError):
    """The curve has bad reduction at the requested prime."""


class ResourceCapError(FrobError):
    """A configured size cap (table size, enumeration bound, work units) would be exceeded."""


class IdentityError(FrobError, AssertionError):
    """An exact identity or invariant that must hold was found violated."""
