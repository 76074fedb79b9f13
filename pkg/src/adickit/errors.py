"""Exception hierarchy shared by all modules."""


class AdicError(Exception):
    """Base class for every error raised by this package."""


class RankMismatch(AdicError, ValueError):
    pass


class PreconditionError(AdicError, ValueError):
    """An operation was called outside its documented domain."""


class CatalogError(PreconditionError):
    """Input lies outside the closed catalog of supported objects."""


class UndecidableAtPrecision(AdicError):
    """A comparison hinges on coefficients that are unknown at the working precision."""


class ParseError(AdicError, ValueError):
    pass
