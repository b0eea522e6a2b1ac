"""glmlab: a simulation lab for likelihood and link misspecification in GLMs."""

__version__ = "0.1.0"

from .kernels import BACKEND as KERNEL_BACKEND  # noqa: F401
