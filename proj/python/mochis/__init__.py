from ._mochis import (
    InvalidArgument,
    InvariantViolation,
    SizeError,
    __version__,
    continuous_moments,
    discrete_moments,
    one_sample_test,
    reconstruct_cdf,
    two_sample_test,
)

__all__ = [
    "InvalidArgument",
    "InvariantViolation",
    "SizeError",
    "__version__",
    "continuous_moments",
    "discrete_moments",
    "one_sample_test",
    "reconstruct_cdf",
    "two_sample_test",
]
