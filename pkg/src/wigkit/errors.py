"""Exception hierarchy for wigkit.

Every error raised by library code is a subclass of :class:`WigkitError`,
so callers (and the CLI) can distinguish usage/format problems from
numerical check failures with a single ``except`` clause.
"""


class WigkitError(Exception):
    """Base class for all wigkit errors."""


# ---- construction / validation -------------------------------------------

class NonSymmetric(WigkitError):
    """A matrix that must be symmetric is not."""


class NonSymmetricC(NonSymmetric):
    """A chirp matrix C must be symmetric."""


class SingularL(WigkitError):
    """A dilation matrix L must be invertible."""


class OddDimension(WigkitError):
    """A symplectic candidate must have even dimension."""


class NotSymplectic(WigkitError):
    """Matrix failed the symplectic invariant at construction."""


class NotHamiltonian(WigkitError):
    """Matrix failed the Hamiltonian (Lie-algebra) invariant at construction."""


class DimMismatch(WigkitError):
    """Operands have incompatible dimensions."""


class GridMismatch(WigkitError):
    """Signals live on different grids."""


class OrderTooHigh(WigkitError):
    """Hermite order exceeds the resolvable bound k <= n/4."""


class OffLattice(WigkitError):
    """A shift does not lie on the sampling or dual lattice."""


class ZeroWindow(WigkitError):
    """STFT window is identically zero."""


class LatticeMismatch(WigkitError):
    """Phase-space fields live on different lattices."""


class RankMismatch(WigkitError):
    """Field has the wrong number of axes."""


class BadExponent(WigkitError):
    """Mixed-norm exponent outside (0, inf]."""


# ---- size / conditioning guards ------------------------------------------

class KernelTooLarge(WigkitError):
    """Grid exceeds the configured memory guard for rank-4 workloads."""


class IllConditioned(WigkitError):
    """Operator matrix condition number exceeds the inversion guard."""


class IllConditionedS(WigkitError):
    """Symplectic matrix is too ill-conditioned (or lattice-incompatible)
    for kernel resampling."""


class FactorizationFailed(WigkitError):
    """No generator factorization found for the symplectic matrix."""


class UnstableStep(WigkitError):
    """Split-step propagation lost unitarity beyond the drift guard."""


# ---- CLI / IO --------------------------------------------------------------

class UnknownSuite(WigkitError):
    """Unknown check-suite name."""


class FormatVersion(WigkitError):
    """File magic/version not recognized."""


class ConfigError(WigkitError):
    """Bad key or value in a run-configuration file."""
