"""Exception hierarchy shared by all modules."""


class DecError(Exception):
    """Base class for every error raised by this package."""


class NonManifold(DecError):
    pass


class Disconnected(DecError):
    pass


class InconsistentOrientation(DecError):
    pass


class DegenerateSimplex(DecError):
    pass


class NotWellCentered(DecError):
    pass


class NotWellCenterable(DecError):
    pass


class DegreeMismatch(DecError):
    pass


class CarrierMismatch(DecError):
    pass


class InvalidDegrees(DecError):
    pass


class DimensionMismatch(DecError):
    pass


class VariantMismatch(DecError):
    pass


class SingularSystem(DecError):
    pass


class BlockStructureMissing(DecError):
    pass


class ConfigError(DecError):
    """Malformed or inconsistent configuration / mesh input."""
