"""Exception hierarchy shared by every qmckit module."""


class QMCError(Exception):
    """Base class for all qmckit errors."""


class ModulusOfQOutOfRange(QMCError, ValueError):
    pass


class TruncationFailure(QMCError, ArithmeticError):
    """An infinite sum or product did not settle within ``max_terms``."""


class DivergentSeries(QMCError, ArithmeticError):
    pass


class PoleInDenominator(QMCError, ZeroDivisionError):
    pass


class ZeroArgument(QMCError, ValueError):
    pass


class ZeroBase(QMCError, ValueError):
    pass


class OutOfConvergenceDomain(QMCError, ValueError):
    pass


class QuotientNotInvariant(QMCError, ArithmeticError):
    """K + L failed the numerical F-invariance test."""


class EliminationSingular(QMCError, ArithmeticError):
    pass


class InvalidParameters(QMCError, ValueError):
    pass


class ParseError(QMCError, ValueError):
    pass


class UnknownFamily(QMCError, KeyError):
    pass


class ConfigError(QMCError, ValueError):
    pass
