"""Arbitrary-precision lab for sequence-encoding constants and Ramanujan's erfc formula."""

from .numkern import (
    DomainError,
    NonConvergenceError,
    PoleError,
    PrecCtx,
    agreed_digits,
    make_context,
    stabilize,
)

__version__ = "0.1.0"
__all__ = [
    "DomainError", "NonConvergenceError", "PoleError", "PrecCtx", "agreed_digits",
    "make_context", "stabilize",
]
