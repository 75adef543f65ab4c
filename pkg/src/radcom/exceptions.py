"""Exception types raised by the waveform solvers."""


class SingularChannelError(ValueError):
    """The channel matrix does not have full row rank."""


class NotPositiveDefiniteError(ValueError):
    """A covariance matrix expected to be positive-definite is not."""


class NumericalFailure(RuntimeError):
    """An iterative routine did not reach its tolerance."""


class DegenerateNodeError(ValueError):
    """A branch-and-bound region has no arc left to split."""
