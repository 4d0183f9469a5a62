"""Exception hierarchy shared by all modules."""


class BakerDynError(Exception):
    """Base class for every error raised by this package."""


class PreconditionError(BakerDynError, ValueError):
    """An input violates a documented precondition."""


class CatalogMissError(BakerDynError, KeyError):
    def __init__(self, key, known):
        self.key = key
        self.known = tuple(known)
        super().__init__(f"unknown id {key!r}; known ids: {', '.join(self.known)}")

    def __str__(self):
        return self.args[0]


class MapOverflowError(BakerDynError, ArithmeticError):
    """An exponential term would overflow; callers treat the point as escaped."""

    def __init__(self, z):
        self.z = z
        super().__init__(f"exp overflow guard exceeded at z={z!r}")


class PoleError(BakerDynError, ArithmeticError):
    def __init__(self, z, pole):
        self.z = z
        self.pole = pole
        super().__init__(f"z={z!r} lies within 1e-12 of the pole {pole!r}")


class BranchFailure(BakerDynError, ArithmeticError):
    """Newton inversion of a local branch did not produce a preimage."""


class PathLiftObstruction(BranchFailure):
    """Continuation along a path was blocked (near a critical value)."""

    def __init__(self, message, parameter=None, point=None):
        self.parameter = parameter
        self.point = point
        super().__init__(message)


class BoundaryGapError(BakerDynError):
    """The local raster could not decide a neighbourhood of the point."""


class DimensionBoundError(BakerDynError):
    """Two branch maps do not form a valid two-map IFS."""


class ConfigError(BakerDynError, ValueError):
    """Experiment configuration failed schema validation."""
