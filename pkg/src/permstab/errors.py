"""Exception types shared across the package."""


class PermstabError(Exception):
    """Base class for all package errors."""


class SizeMismatchError(PermstabError, ValueError):
    """Two permutations / partial injections live on ground sets of different size."""


class CapacityError(PermstabError, ValueError):
    """A closure or enumeration exceeded its configured cap."""


class NotAHomomorphismError(PermstabError, ValueError):
    """Generator images violate a relator, or an element map is not multiplicative."""

    def __init__(self, message: str, relator=None):
        super().__init__(message)
        self.relator = relator


class NotASubgroupError(PermstabError, ValueError):
    """An element set is not closed under multiplication / inversion."""


class NotAnActionError(PermstabError, ValueError):
    """Supplied permutations do not define a group action."""


class NotAbelianError(PermstabError, ValueError):
    """An operation restricted to abelian groups received a non-abelian one."""


class NonGeneratingError(PermstabError, ValueError):
    """The supplied generator set does not generate the group."""


class NotSurjectiveError(PermstabError, ValueError):
    """A homomorphism required to be onto is not."""


class WindowEmptyError(PermstabError, ValueError):
    """No integer cardinality fits inside the requested density window."""


class NoWitnessError(PermstabError, ValueError):
    """No group element satisfies the required shrink inequalities at this size."""


class OutOfRegimeError(PermstabError, ValueError):
    """Measured defect is too large for the certified rounding regime."""


class EigensolveError(PermstabError, RuntimeError):
    """The sparse eigensolver failed to converge."""


class ConfigError(PermstabError, ValueError):
    """Invalid experiment configuration."""
