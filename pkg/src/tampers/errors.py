"""Exception types shared across the package."""


class TampersError(Exception):
    """Base class for all errors raised by this package."""


class EmptyTextError(TampersError):
    """Tokenization produced no tokens."""


class InvalidSubstitutionError(TampersError):
    """A substitution targets a position that is not a content word."""


class InputIOError(TampersError):
    """A required input file could not be read."""


class EmptyLexiconError(TampersError):
    """A lexicon file parsed to zero valid rows."""


class DimensionMismatchError(TampersError):
    """Embedding rows disagree on vector dimension."""


class EmbeddingParseError(TampersError):
    """An embedding row contains a non-numeric or non-finite component."""


class TransportError(TampersError):
    """The remote victim could not be reached or returned a bad status."""


class ProtocolError(TampersError):
    """The remote victim answered with a malformed or invalid response."""


class ConfigError(TampersError):
    """A configuration value failed validation."""


class DegenerateTextError(TampersError):
    """A metric was requested on a text with no word tokens."""


class QueryBudgetExceeded(TampersError):
    """The per-sample query budget would be exceeded by the next batch."""
