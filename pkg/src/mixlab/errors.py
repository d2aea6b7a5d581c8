"""Exception vocabulary shared across mixlab modules."""


class MixlabError(Exception):
    """Base class for all package-specific errors."""


class OutOfRange(MixlabError, ValueError):
    """A scalar argument (site, k, N, eps, ...) is outside its allowed range."""


class ShapeMismatch(MixlabError, ValueError):
    """Two objects that must live on the same state space do not."""


class InconsistentLevels(MixlabError, ValueError):
    """A family of projection levels does not come from a single permutation."""


class BiasedModel(MixlabError, ValueError):
    """Operation requires a symmetric model but the spec is biased."""


class WrongModel(MixlabError, ValueError):
    """Operation is undefined for this model family."""


class ModelUnsupported(MixlabError, ValueError):
    """The requested computation does not exist for this model."""


class NotOrdered(MixlabError, ValueError):
    """A coupled pair is not ordered under the coordinate partial order."""


class Incomparable(MixlabError, ValueError):
    """Neither order direction holds for a pair of states."""


class CoalescenceTimeout(MixlabError, RuntimeError):
    """Coupling-from-the-past gave up before the sandwich coalesced."""


class TooLarge(MixlabError, ValueError):
    """State space exceeds the configured enumeration cap."""


class SolveFailure(MixlabError, RuntimeError):
    """A linear solve for the stationary law failed or disagreed with closed form."""


class NotNormalized(MixlabError, ValueError):
    """A probability vector does not sum to one within tolerance."""


class ConfigError(MixlabError, ValueError):
    """An experiment config file is malformed; exit code 2."""


class ResourceError(MixlabError, RuntimeError):
    """An experiment exceeds resource limits (state-space size, ...); exit code 3."""
