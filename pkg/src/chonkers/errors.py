class ChonkersError(Exception):
    pass


class ConfigurationError(ChonkersError):
    pass


class EmptyInputError(ChonkersError, ValueError):
    pass


class UndefinedDiffbitError(ChonkersError, ValueError):
    """Raised when asking for the diffbit of two equal sequences."""


class InvariantError(ChonkersError, AssertionError):
    """A phase pre- or postcondition failed; indicates a pipeline bug."""


class UnsupportedSizeError(ChonkersError, ValueError):
    pass
