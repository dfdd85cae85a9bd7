"""Exception hierarchy shared by the codec, builders and simulator."""


class CompactRoutingError(Exception):
    """Base class for all errors raised by this package."""


class MalformedCodeError(CompactRoutingError, ValueError):
    """A bit string does not parse under the expected code."""


class LengthMismatchError(CompactRoutingError, ValueError):
    """A graph encoding has the wrong number of bits for its node count."""


class ModelError(CompactRoutingError, ValueError):
    """A construction or action is not legal under the requested model."""


class LemmaViolationError(CompactRoutingError):
    """The graph fails a structural property a construction depends on."""

    def __init__(self, lemma: str, detail: str = ""):
        self.lemma = lemma
        super().__init__(f"graph fails the {lemma} check" + (f": {detail}" if detail else ""))


class ConstructionError(CompactRoutingError):
    """A builder could not complete, e.g. a destination has no covering intermediate."""


class CenterUncoveredError(ConstructionError):
    pass


class InconsistentFunctionError(CompactRoutingError):
    """Routing functions disagree about the permutation they encode."""


class RoutingError(CompactRoutingError):
    """Raised while simulating a route."""


class IllegalActionError(RoutingError):
    pass


class InvalidLabelError(RoutingError):
    pass


class HopCapExceededError(RoutingError):
    pass


class ProbeExhaustedError(RoutingError):
    pass


class RetryExhaustedError(CompactRoutingError):
    """Every resampled graph failed the lemma checks."""
