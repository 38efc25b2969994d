"""Exception hierarchy shared by every reglab module."""


class ReglabError(Exception):
    """Base class; ``stage`` names the pipeline stage that failed, if any."""

    stage = "library"


class DegenerateLattice(ReglabError, ValueError):
    pass


class NotUnimodular(ReglabError, ValueError):
    pass


class NotAnIsogeny(ReglabError, ValueError):
    pass


class NomeOutOfRange(ReglabError, ValueError):
    pass


class ConvergenceRegion(ReglabError, ValueError):
    pass


class PoleEncountered(ReglabError, ArithmeticError):
    pass


class SingularEntry(ReglabError, ValueError):
    pass


class NonInvertibleMultiplier(ReglabError, ValueError):
    pass


class NotASubgroup(ReglabError, ValueError):
    pass


class ZeroModulus(ReglabError, ValueError):
    pass


class NotCoprime(ReglabError, ValueError):
    pass


class MissingGammaData(ReglabError, ValueError):
    pass


class SingularR(ReglabError, ArithmeticError):
    pass


class DegenerateTwist(ReglabError, ValueError):
    stage = "twist"


class ConfigError(ReglabError, ValueError):
    stage = "config"
