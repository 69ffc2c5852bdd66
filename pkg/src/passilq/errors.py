"""Exception types raised by the passilq library.

Every exception derives from :class:`PassilqError` so callers can distinguish
library failures from programming errors.  Numerical check failures that are
part of a normal result (a system simply not being passive, say) are reported
through result objects, not exceptions; exceptions mark inputs or situations
the algorithms cannot handle.
"""


class PassilqError(Exception):
    """Base class for all passilq errors."""


class DimensionMismatch(PassilqError):
    """Matrix blocks have inconsistent shapes for the requested operation."""


class NonHermitian(PassilqError):
    """A matrix required to be Hermitian is not, beyond tolerance.

    Carries the offending location (a grid point for coefficient fields,
    a matrix name otherwise).
    """

    def __init__(self, where, defect):
        self.where = where
        self.defect = float(defect)
        super().__init__(f"non-Hermitian at {where}: defect {defect:.3e}")


class PositivityViolation(PassilqError):
    """A matrix required to be uniformly positive definite is not."""

    def __init__(self, where, min_eig):
        self.where = where
        self.min_eig = float(min_eig)
        super().__init__(f"positivity violated at {where}: min eigenvalue {min_eig:.3e}")


class RankDeficient(PassilqError):
    """A matrix fails a required row or column rank condition."""


class ComplementarityFailure(PassilqError):
    """The stacked boundary matrix is too ill conditioned to be invertible.

    The boundary input and the homogeneous condition must jointly determine
    all boundary traces; this failing means the boundary conditions do not
    complement each other.
    """

    def __init__(self, cond):
        self.cond = float(cond)
        super().__init__(f"boundary complementarity failure: condition number {cond:.3e}")


class SingularP1H(PassilqError):
    """The flux coefficient product has a near-zero eigenvalue."""


class SingularR0(PassilqError):
    """The boundary-flow change of variables is singular (P1 singular)."""


class NonHermitianM(PassilqError):
    """The energy weight of a discrete system is not Hermitian."""


class NotPositiveDefiniteM(PassilqError):
    """The energy weight of a discrete system is not positive definite."""


class StructureRestorationFailed(PassilqError):
    """Projection could not restore the certified class at tolerance.

    Signals the discretization scheme is inadequate for this system, rather
    than silently returning a system of a weaker class.
    """


class NoStabilizingSolution(PassilqError):
    """The Riccati iteration found no stabilizing Hermitian solution."""


class HamiltonianEigSplitFailure(PassilqError):
    """Hamiltonian eigenvalues do not split off the imaginary axis."""


class NotEnergyPreserving(PassilqError):
    """An operation valid only for energy-preserving systems was requested."""


class ClosedLoopNotStable(PassilqError):
    """The optimal closed loop keeps an eigenvalue on or right of the axis."""

    def __init__(self, eigenvalue):
        self.eigenvalue = complex(eigenvalue)
        super().__init__(f"closed loop not Hurwitz: eigenvalue {eigenvalue}")


class ResolventSingular(PassilqError):
    """Transfer-function evaluation requested at a spectrum point."""

    def __init__(self, s):
        self.s = complex(s)
        super().__init__(f"resolvent singular at s = {s}")


class StepSolveSingular(PassilqError):
    """The implicit midpoint step matrix is singular at the given step size."""
