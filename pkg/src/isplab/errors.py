"""Exception hierarchy.  ``exit_code`` is what the CLI returns for each class."""


class IsplabError(Exception):
    exit_code = 1


class ConfigError(IsplabError, ValueError):
    exit_code = 2


class DescriptorMismatch(IsplabError, KeyError):
    """A basis index or label that does not belong to the space."""

    exit_code = 2

    def __str__(self):
        return Exception.__str__(self)


class Unclassifiable(IsplabError):
    exit_code = 2


class LevelExhausted(IsplabError):
    """The requested level set E_j is finite and ran out of fresh indices."""

    exit_code = 2


class ConstructionRefused(IsplabError):
    """The space satisfies the ISP criterion, so no Read-type operator is built."""

    exit_code = 2


class HorizonError(IsplabError):
    """An operation touched a position at or beyond the committed horizon."""

    exit_code = 3


class StageBudgetExceeded(HorizonError):
    """The next stage would exceed the configured size budget."""


class ExponentRangeError(StageBudgetExceeded, ArithmeticError):
    """A binary64-mode value overflowed the MPFR exponent range."""


class HorizonTooShort(HorizonError):
    pass


class CertificateFailure(IsplabError):
    exit_code = 4

    def __init__(self, message, failures=()):
        super().__init__(message)
        self.failures = list(failures)


class FrameError(IsplabError, ValueError):
    exit_code = 2


class PreconditionError(IsplabError, ValueError):
    exit_code = 5


class WitnessError(IsplabError):
    exit_code = 5


class ZeroVectorError(WitnessError, ValueError):
    pass
