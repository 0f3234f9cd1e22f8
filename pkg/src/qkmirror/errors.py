"""Exception hierarchy shared by all modules."""


class QKMirrorError(ValueError):
    """Base class for every error raised by the toolkit."""


class ConfigError(QKMirrorError):
    """Invalid user input: malformed model, bad parameter, unsupported mode."""


class UnsupportedRankError(ConfigError):
    pass


class NotNormalizableError(QKMirrorError):
    pass


class PoleError(QKMirrorError):
    """A function was evaluated at (or its Taylor expansion centred on) a pole."""


class DivergenceError(QKMirrorError):
    """A product factor came numerically close to zero without vanishing exactly."""


class NonDecayError(QKMirrorError):
    """A lattice sum did not show decay within the hard term cap."""


class TruncationError(QKMirrorError):
    """The requested tail tolerance cannot be certified at the given truncation degree."""
