"""Generalized continued fractions and Ramanujan's fraction for the erfc-type constant.

A fraction is ``b0 + a1/(b1 + a2/(b2 + ...))`` given by a coefficient
function ``n -> (a_n, b_n)``. Coefficients may be ints, Fractions or mpmath
numbers; rationals are converted at the working precision of the evaluation,
so one GeneralizedCF can be evaluated at any precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from mpmath import mp, mpf

from .numkern import (
    DomainError,
    NonConvergenceError,
    PrecCtx,
    agreed_digits,
    stabilize,
    to_number,
)

DEFAULT_DEPTH_CAP = 2 ** 20
DEFAULT_LENTZ_CAP = 2 ** 20


class ZeroDenominatorError(NonConvergenceError):
    def __init__(self, depth):
        super().__init__(f"zero denominator at depth {depth}")
        self.depth = depth


@dataclass(frozen=True)
class GeneralizedCF:
    b0: object
    coeffs: Callable[[int], tuple]
    name: str = ""

    def terms(self, n):
        a, b = self.coeffs(n)
        return _num(a), _num(b)


@dataclass(frozen=True)
class CFEvaluation:
    value: mpf
    depth: int
    method: str
    certified_digits: int


def _num(v):
    if isinstance(v, int):
        return v
    return to_number(v)


def _positive(x):
    if isinstance(x, (mpf, float)):
        return x > 0
    return Fraction(x) > 0


def ramanujan_cf(x) -> GeneralizedCF:
    """1/(x + 1/(1 + 2/(x + 3/(1 + 4/(x + ...)))))."""
    if not _positive(x):
        raise DomainError(f"Ramanujan's fraction needs x > 0, got {x}")

    def coeffs(n):
        if n < 1:
            raise ValueError("coefficients start at n = 1")
        a = 1 if n == 1 else n - 1
        return a, (x if n % 2 else 1)

    return GeneralizedCF(0, coeffs, name=f"ramanujan_cf({x})")


def convergent(cf: GeneralizedCF, depth: int):
    """Depth-truncated value, evaluated bottom-up at the current precision."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    tail = mpf(0)
    for n in range(depth, 0, -1):
        a, b = cf.terms(n)
        den = b + tail
        if den == 0:
            raise ZeroDenominatorError(n)
        tail = a / den
    return _num(cf.b0) + tail


def lentz_value(cf: GeneralizedCF, max_terms: int = DEFAULT_LENTZ_CAP, tiny=None):
    """Modified Lentz evaluation at the current precision.

    Returns ``(value, terms_consumed)``.
    """
    tol = mpf(10) ** (-mp.dps)
    if tiny is None:
        tiny = mpf(10) ** (-2 * mp.dps)
    b0 = _num(cf.b0)
    a1, b1 = cf.terms(1)
    if a1 == 0:
        return mpf(b0), 1
    f = b0 if b0 != 0 else tiny
    c, d = f, mpf(0)
    a, b = a1, b1
    for j in range(1, max_terms + 1):
        if j > 1:
            a, b = cf.terms(j)
        d = b + a * d
        if d == 0:
            d = tiny
        c = b + a / c
        if c == 0:
            c = tiny
        d = 1 / d
        delta = c * d
        f *= delta
        if abs(delta - 1) < tol:
            return f, j
    raise NonConvergenceError(f"Lentz iteration did not converge in {max_terms} terms")


def cf_eval_backward(cf: GeneralizedCF, depth: int, ctx: PrecCtx,
                     depth_cap: int = DEFAULT_DEPTH_CAP) -> CFEvaluation:
    """Double the truncation depth until two successive convergents agree to ctx.digits."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    with mp.workdps(ctx.working):
        previous = convergent(cf, depth)
        while True:
            nxt = 2 * depth
            if nxt > depth_cap:
                raise NonConvergenceError(
                    f"backward evaluation not stable below depth cap {depth_cap}")
            current = convergent(cf, nxt)
            agree = agreed_digits(previous, current, cap=ctx.working)
            depth = nxt
            if agree >= ctx.digits:
                return CFEvaluation(current, depth, "backward", agree)
            previous = current


def cf_eval_lentz(cf: GeneralizedCF, ctx: PrecCtx,
                  max_terms: int = DEFAULT_LENTZ_CAP) -> CFEvaluation:
    depth = 0

    def task(_w):
        nonlocal depth
        value, depth = lentz_value(cf, max_terms)
        return value

    value, certified = stabilize(task, ctx)
    return CFEvaluation(value, depth, "lentz", certified)


def ramanujan_cf_value(x):
    """Kernel: Ramanujan's fraction at the current precision."""
    return lentz_value(ramanujan_cf(x))[0]


def ramanujan_rhs(x):
    """sqrt(pi e^x / (2x)) at the current precision."""
    xv = to_number(x)
    return mp.sqrt(mp.pi * mp.exp(xv) / (2 * xv))


def ramanujan_gap(x, ctx: PrecCtx):
    """|CF(x) + S(x) - sqrt(pi e^x/(2x))| with each side evaluated independently."""
    from .specfun import series_double_factorial

    cf = cf_eval_lentz(ramanujan_cf(x), ctx)
    series = series_double_factorial(x, ctx)
    with mp.workdps(ctx.confirm):
        return abs(cf.value + series.value - ramanujan_rhs(x))
