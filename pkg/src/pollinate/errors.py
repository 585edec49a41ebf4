"""Exception types shared across the package."""


class PollinateError(Exception):
    """Base class for every error raised by this package."""

    code = "PollinateError"


class NoAlternativePlatform(PollinateError):
    code = "NoAlternativePlatform"


class UnknownPlatform(PollinateError, KeyError):
    code = "UnknownPlatform"


class UnknownPersonality(PollinateError, KeyError):
    code = "UnknownPersonality"


class InvalidLandscape(PollinateError, ValueError):
    """Raised when a landscape fails validation; carries the diagnostics."""

    code = "InvalidLandscape"

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


class InvalidTripCount(PollinateError, ValueError):
    code = "InvalidTripCount"


class NoPoolConfigured(PollinateError, ValueError):
    code = "NoPoolConfigured"


class InstanceTooLarge(PollinateError, ValueError):
    code = "InstanceTooLarge"


class InvalidStep(PollinateError, ValueError):
    code = "InvalidStep"


class EmptyDataset(PollinateError, ValueError):
    code = "EmptyDataset"


class MalformedRow(PollinateError, ValueError):
    code = "MalformedRow"

    def __init__(self, line, message=""):
        self.line = line
        super().__init__(f"line {line}: {message}" if message else f"line {line}")


class NonPositiveValue(MalformedRow):
    code = "NonPositiveValue"


class DuplicatePlatform(PollinateError, ValueError):
    code = "DuplicatePlatform"

    def __init__(self, name, line=None):
        self.name = name
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"duplicate platform {name!r}{where}")


class NonPositiveLength(PollinateError, ValueError):
    code = "NonPositiveLength"


class EmptyProfiles(PollinateError, ValueError):
    code = "EmptyProfiles"


class DegenerateInterval(PollinateError, ValueError):
    code = "DegenerateInterval"


class InvalidLearningRate(PollinateError, ValueError):
    code = "InvalidLearningRate"


class PersonalityNotPresent(PollinateError, ValueError):
    code = "PersonalityNotPresent"
