"""Numerical and exact checks of mirror-symmetry identities for toric Fano
manifolds of Picard rank at most two."""

__version__ = "0.1.0"

from .errors import (ConfigError, DivergenceError, NonDecayError, NotNormalizableError, PoleError,
                     QKMirrorError, TruncationError, UnsupportedRankError)
from .toric import MomentData, RankTwoModel, integrate, normalize, parse_family, validate

__all__ = [
    "ConfigError", "DivergenceError", "MomentData", "NonDecayError", "NotNormalizableError", "PoleError",
    "QKMirrorError", "RankTwoModel", "TruncationError", "UnsupportedRankError", "integrate", "normalize",
    "parse_family", "validate",
]
