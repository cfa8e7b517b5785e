"""Exception hierarchy for riverkpp.

Domain errors derive from :class:`RiverKppError` so callers (and the CLI)
can distinguish modelling problems from programming bugs.
"""


class RiverKppError(Exception):
    """Base class for all domain errors raised by this package."""


# -- network construction -----------------------------------------------------

class NonpositiveParameter(RiverKppError):
    """An advection speed or cross-section was not strictly positive."""


class ConservationViolated(RiverKppError):
    """Cross-section-weighted flow into the junction does not balance."""

    def __init__(self, residual: float, message: str | None = None):
        self.residual = float(residual)
        super().__init__(message or f"flow conservation violated, relative residual {residual:.3e}")


class NoUpperBranch(RiverKppError):
    """Network has no upstream branch."""


class NoLowerBranch(RiverKppError):
    """Network has no downstream branch."""


class UnsupportedTopology(RiverKppError):
    """Operation is only defined for specific star configurations."""


# -- phase plane ---------------------------------------------------------------

class InvalidKindForMu(RiverKppError):
    """Requested special trajectory does not exist for this reaction strength."""


class IntegrationDiverged(RiverKppError):
    """Trajectory left the guard window of the phase plane."""


class StoppingConditionNotReached(RiverKppError):
    """Integration hit its span/step budget before the stop condition."""


class NonMonotonePhi(RiverKppError):
    """Trajectory arc folds in phi; it cannot be written as psi = Psi(phi)."""


# -- stationary analysis -------------------------------------------------------

class RegimeHasNoThreshold(RiverKppError):
    """Parameter regime admits no threshold (no solutions, or solutions for all alpha)."""


class NoCrossingFound(RiverKppError):
    """Comparison curves never cross although the regime predicts a threshold."""


class InfeasibleAlpha(RiverKppError):
    """No stationary state with the requested junction value in this regime."""


class TrajectoryEscapedUnitBox(RiverKppError):
    """Profile trajectory left [0, 1]; the junction data were not admissible."""


class WindowTooShort(RiverKppError):
    """Fit window does not span enough e-foldings for a decay-rate estimate."""


class AmbiguousFit(RiverKppError):
    """Fitted decay exponent is far from both closed-form candidates."""


class NotConverged(RiverKppError):
    """Relaxation run hit its time budget before reaching tolerance."""


# -- simulation ----------------------------------------------------------------

class IncompatibleJunctionData(RiverKppError):
    """Initial branch values disagree at the junction."""


class NegativeInitialData(RiverKppError):
    """Initial data must be nonnegative."""


class LinearSolveFailed(RiverKppError):
    """Implicit step produced a non-finite solution."""


class StabilityViolation(RiverKppError):
    """A field left the invariant box [0, bound] beyond tolerance."""


class GridMismatch(RiverKppError):
    """States live on different grids or networks."""


class NotSettled(RiverKppError):
    """Time series too short to classify; junction value still drifting."""


class ContaminationWarning(UserWarning):
    """The moving front reached the far 10% of a truncated branch."""
