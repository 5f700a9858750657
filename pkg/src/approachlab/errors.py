"""Exception types shared across the package."""


class ApproachLabError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(ApproachLabError):
    pass


class MembershipViolation(ApproachLabError):
    """An action fell outside its declared set; signals a learner/adversary bug."""


class UncoveredPoint(ApproachLabError):
    """A piecewise response has no cell containing the queried loss."""


class EmptyCloud(ApproachLabError):
    pass


class DimensionTooHigh(ApproachLabError):
    """Exact geometric path requested in a dimension where only sampling is supported."""


class Infeasible(ApproachLabError):
    """No feasible point exists (e.g. removal budget too large for the epoch)."""


class InnerMinUnbounded(ApproachLabError):
    """The inner minimization diverged; only possible for a malformed action set."""


class EmptyHull(ApproachLabError):
    pass


class GradientBoundExceeded(ApproachLabError):
    pass


class LossOutOfRange(ApproachLabError):
    pass


class NetTooLarge(ApproachLabError):
    """Covering net would exceed the configured size cap."""


class EmptyHistory(ApproachLabError):
    pass


class ScheduleMismatch(ApproachLabError):
    """Epoch count does not divide the horizon."""


class IncompleteEpoch(ApproachLabError):
    pass


class UnknownPreset(ApproachLabError):
    pass


class HorizonExceeded(ApproachLabError):
    pass


class NoGroundTruth(ApproachLabError):
    """Adversary has no declared restriction set to measure against."""


class TooFewPoints(ApproachLabError):
    """Not enough checkpoints for a rate fit."""
