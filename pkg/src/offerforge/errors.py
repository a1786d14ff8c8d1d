"""Exception types shared across modules.

Each error maps to a CLI exit code through ``exit_code``: 2 for bad input,
3 for a missing artifact, 4 for a bad parameter.
"""


class OfferforgeError(Exception):
    exit_code = 2


class EmptyDataset(OfferforgeError, ValueError):
    pass


class InvalidCode(OfferforgeError, ValueError):
    pass


class UnknownSegment(OfferforgeError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class EmptyNode(OfferforgeError, ValueError):
    pass


class SchemaMismatch(OfferforgeError, ValueError):
    pass


class PhiTooSmall(OfferforgeError, ValueError):
    exit_code = 4


class NotPresent(OfferforgeError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class EmptyInput(OfferforgeError, ValueError):
    pass


class UnknownAttribute(OfferforgeError, ValueError):
    pass


class RuleSyntaxError(OfferforgeError, ValueError):
    """Malformed rule text; ``position`` is the 0-based character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class DuplicatePattern(OfferforgeError, ValueError):
    pass


class UnknownKeyword(OfferforgeError, ValueError):
    pass


class ConfigError(OfferforgeError, ValueError):
    exit_code = 4


class MissingArtifact(OfferforgeError, FileNotFoundError):
    exit_code = 3


class MalformedInput(OfferforgeError, ValueError):
    pass
