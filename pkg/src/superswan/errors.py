"""Exception types shared across the package."""


class InvariantViolation(ValueError):
    """A structural law failed; ``witness`` pins down where."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness or {}


class NotHomogeneous(InvariantViolation):
    pass


class NotAnIdeal(InvariantViolation):
    pass


class AlgebraMismatch(ValueError):
    pass


class NonSplitResidue(Exception):
    """The semisimple quotient of the even part has a factor other than Q."""


class HypothesisFailed(Exception):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness or {}


class PreconditionFailed(HypothesisFailed):
    pass


class WitnessNotFound(RuntimeError):
    """A witness guaranteed to exist was not found; indicates a bug."""


class VerificationFailed(InvariantViolation):
    """An identity that must hold by construction did not."""


class IncompatibleSections(InvariantViolation):
    pass


class RealizabilityFailed(InvariantViolation):
    pass


class NotExtendable(InvariantViolation):
    pass


class NotSurjective(InvariantViolation):
    pass


class StalkNotBijective(InvariantViolation):
    pass


class SheafComparisonFailed(VerificationFailed):
    pass
