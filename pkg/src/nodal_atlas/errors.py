"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`NodalAtlasError`, which is itself a ``ValueError`` so that callers
validating user input can catch either.
"""


class NodalAtlasError(ValueError):
    pass


# spectra
class MixedEigenvalue(NodalAtlasError):
    """Terms of a proposed eigenfunction lie on different lattice circles."""


class EmptySpectrum(NodalAtlasError):
    """No terms, or every coefficient is zero."""


class InvalidPair(NodalAtlasError):
    pass


class NotAnEigenvalue(NodalAtlasError):
    pass


class NotRealValued(NodalAtlasError):
    """Torus coefficients violate conjugate symmetry."""


# lattice
class EmptyCircle(NodalAtlasError):
    pass


class EmptyCircleWarning(UserWarning):
    pass


class NetConstructionFailed(NodalAtlasError):
    pass


class NoValidDirection(NodalAtlasError):
    pass


# nodal
class ResolutionTooCoarse(NodalAtlasError):
    pass


class UnresolvedAmbiguity(NodalAtlasError):
    def __init__(self, message, cells=()):
        super().__init__(message)
        self.cells = list(cells)


class RadiusTooLarge(NodalAtlasError):
    pass


# meshbound
class TransversalityFailure(NodalAtlasError):
    pass


class DegenerateRestriction(NodalAtlasError):
    pass


class NotInSectorClass(NodalAtlasError):
    pass


# nodalgraph
class GraphInconsistency(NodalAtlasError):
    pass
