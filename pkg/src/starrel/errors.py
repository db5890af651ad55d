"""Exception hierarchy shared by every starrel module."""


class StarRelError(Exception):
    """Base class for domain errors raised by starrel."""


class NonPolynomial(StarRelError):
    pass


class UnboundGenerator(StarRelError):
    pass


class NotPSD(StarRelError):
    pass


class NotHermitian(StarRelError):
    pass


class Singular(StarRelError):
    pass


class DimMismatch(StarRelError):
    pass


class DomainMismatch(StarRelError):
    pass


class NotInjective(StarRelError):
    pass


class EmptyList(StarRelError):
    pass


class NonpositiveWeight(StarRelError):
    pass


class MalformedRelation(StarRelError):
    pass


class AlphaNotRepresentation(StarRelError):
    pass


class BadDimension(StarRelError):
    pass


class MissingEntry(StarRelError):
    pass


class BadIndex(StarRelError):
    pass


class IncompatiblePair(StarRelError):
    pass


class NotCoherent(StarRelError):
    pass


class NotSurjective(StarRelError):
    pass


class UnknownName(StarRelError):
    pass


class DslError(StarRelError):
    """Parse-time error carrying a source position."""

    def __init__(self, message, line=0, column=0, expected=()):
        self.line = line
        self.column = column
        self.expected = tuple(sorted(expected))
        where = f"{line}:{column}: " if line else ""
        tail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{where}{message}{tail}")


class DslSyntaxError(DslError):
    pass


class UndeclaredGenerator(DslError):
    pass


class DuplicateGenerator(DslError):
    pass
