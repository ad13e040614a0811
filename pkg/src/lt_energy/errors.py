"""Exception types raised across the package."""


class LTEnergyError(ValueError):
    """Base class for all domain errors."""


class NumericalError(LTEnergyError):
    """Base class for numerical failures (CLI exit code 3)."""


# degree
class EmptyDistribution(LTEnergyError):
    pass


class NonPositiveProbability(LTEnergyError):
    pass


class NotNormalized(LTEnergyError):
    def __init__(self, total):
        super().__init__(f"probabilities sum to {total!r}, not 1")
        self.total = total


# lt_codec
class LengthMismatch(LTEnergyError):
    pass


# channel
class NonPositiveDistance(LTEnergyError):
    pass


class UnsupportedM(LTEnergyError):
    pass


class BerOutOfRange(LTEnergyError):
    pass


class NoConvergence(NumericalError):
    pass


# rate_profile
class InsufficientCoverage(NumericalError):
    pass


# energy_model
class DurationOverflow(LTEnergyError):
    pass


class MOutOfRange(LTEnergyError):
    pass


class MissingGain(LTEnergyError):
    pass


class EmptyTable(LTEnergyError):
    pass


class BoundTooSmall(LTEnergyError):
    pass


class NoCrossover(NumericalError):
    pass


# scheme_catalog
class UnknownKey(LTEnergyError):
    pass


class BadValue(LTEnergyError):
    pass


class UnreadableFile(LTEnergyError):
    pass


class UnknownCode(LTEnergyError):
    pass


class MissingCell(LTEnergyError):
    pass


class UnknownScheme(LTEnergyError):
    pass
