"""Exception types shared across the library."""


class AitlabError(Exception):
    """Base class for all library-specific errors."""


class CapExceeded(AitlabError):
    """A bit string or pair encoding would exceed the global 64-bit cap."""


class MalformedCode(AitlabError):
    """A pair code has no terminator at an even offset."""


class Underflow(AitlabError):
    """Asked to drop more bits than the string has."""


class NoWitness(AitlabError):
    """A witness program was requested for a value that is only a lower bound."""


class Indeterminate(AitlabError):
    """A derived quantity needs exact complexities but a search cap was hit."""


class OracleCapped(AitlabError):
    """An experiment needed an exact complexity but got a lower bound."""


class NoIncompressibleZ(AitlabError):
    """No auxiliary string with the required independence could be found."""


class NoPairAtSlack(AitlabError):
    """Conditional-description search failed at the requested slack.

    Carries ``minimal_slack``, the smallest slack at which a pair exists
    (None if none was found within the search limit).
    """

    def __init__(self, slack: int, minimal_slack: int | None = None):
        self.slack = slack
        self.minimal_slack = minimal_slack
        detail = f"no pair at slack {slack}"
        if minimal_slack is not None:
            detail += f" (minimal feasible slack: {minimal_slack})"
        super().__init__(detail)


class InvalidPair(AitlabError):
    """A conditional-description pair failed revalidation."""


class NotLipschitz(AitlabError):
    """A sequence or grid violates its claimed step bound."""

    def __init__(self, index, detail=""):
        self.index = index
        super().__init__(f"step bound violated at {index}" + (f": {detail}" if detail else ""))


class NotBracketed(AitlabError):
    """The threshold lies outside the range spanned by the endpoints."""


class TooClose(AitlabError):
    """A path point is too close to the winding target."""

    def __init__(self, point, detail=""):
        self.point = point
        super().__init__(f"path point {point} too close to target" + (f": {detail}" if detail else ""))


class ZeroWinding(AitlabError):
    """The boundary image does not wind around the target; no preimage is certified."""


class BoundaryTooClose(AitlabError):
    """The boundary image comes within the step bound of the target."""


class VersionMismatch(AitlabError):
    """A cache file was produced by a different machine version."""


class CorruptCache(AitlabError):
    """A cache file failed its checksum or structural checks."""
