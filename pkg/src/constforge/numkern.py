"""Precision contexts, decimal digit agreement and the two-pass precision ladder.

Every numeric quantity in the package is an mpmath ``mpf`` (real) or ``mpc``
(complex). Working precision is set through mpmath's global context, so a
single evaluation must not be interleaved with another one running in a
different thread; parallel batches use processes.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction
from typing import Callable, NamedTuple, Union

from mpmath import mp, mpc, mpf

Real = mpf
Cx = mpc
Number = Union[mpf, mpc]

MIN_DIGITS = 8
MIN_GUARD = 5
MIN_LADDER = 5


class ConstforgeError(Exception):
    """Base class for all errors raised by the package."""


class PrecisionError(ConstforgeError, ValueError):
    pass


class DomainError(ConstforgeError, ValueError):
    """Argument outside the domain of an operation."""

    reason = "domain"


class PoleError(DomainError):
    reason = "pole"


class NonConvergenceError(ConstforgeError, ArithmeticError):
    reason = "non_convergence"


@dataclass(frozen=True)
class PrecCtx:
    digits: int
    guard: int = 10
    ladder_step: int = 10

    def __post_init__(self):
        for name in ("digits", "guard", "ladder_step"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, numbers.Integral):
                raise PrecisionError(f"{name} must be an integer, got {value!r}")
        if self.digits < MIN_DIGITS:
            raise PrecisionError(f"digits must be >= {MIN_DIGITS}, got {self.digits}")
        if self.guard < MIN_GUARD:
            raise PrecisionError(f"guard must be >= {MIN_GUARD}, got {self.guard}")
        if self.ladder_step < MIN_LADDER:
            raise PrecisionError(f"ladder_step must be >= {MIN_LADDER}, got {self.ladder_step}")

    @property
    def working(self) -> int:
        """Decimal digits carried by the first ladder pass."""
        return self.digits + self.guard

    @property
    def confirm(self) -> int:
        return self.digits + self.guard + self.ladder_step


def make_context(digits: int, guard: int = 10, ladder_step: int = 10) -> PrecCtx:
    return PrecCtx(digits, guard, ladder_step)


def to_number(x) -> Number:
    """Convert ``x`` to an mpf/mpc at the current working precision.

    Fractions and ``"p/q"`` strings are divided at working precision, so
    exact rational inputs stay exact up to the final rounding.
    """
    if isinstance(x, (mpf, mpc)):
        return +x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, numbers.Integral):
        return mpf(int(x))
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    if isinstance(x, str):
        text = x.strip()
        if "/" in text:
            return to_number(Fraction(text))
        return mpf(text)
    if isinstance(x, complex):
        return mpc(x)
    if isinstance(x, numbers.Real):
        return mpf(x)
    raise TypeError(f"cannot convert {type(x).__name__} to a number")


def is_complex(x) -> bool:
    return isinstance(x, (mpc, complex))


def simplify(x: Number) -> Number:
    """Drop an exactly-zero imaginary part."""
    if isinstance(x, mpc) and x.imag == 0:
        return x.real
    return x


def exact_decimal(x) -> Decimal:
    """Exact decimal expansion of a finite binary float, int or decimal string."""
    if isinstance(x, Decimal):
        return x
    if isinstance(x, str):
        return Decimal(x.strip())
    if isinstance(x, numbers.Integral):
        return Decimal(int(x))
    if not isinstance(x, mpf):
        x = mpf(x)
    if not mp.isfinite(x):
        raise DomainError(f"non-finite value {x}")
    sign, man, exp, _bc = x._mpf_
    if man == 0:
        return Decimal(0)
    man = -int(man) if sign else int(man)
    if exp >= 0:
        return Decimal(man << exp)
    k = -int(exp)
    return Decimal(f"{man * 5 ** k}e-{k}")


def round_significant(x, digits: int) -> Decimal:
    """Correctly rounded (half-even) value of ``x`` to ``digits`` significant digits."""
    d = exact_decimal(x)
    with localcontext() as c:
        c.prec = digits
        c.rounding = ROUND_HALF_EVEN
        c.Emax = 10 ** 9
        c.Emin = -(10 ** 9)
        return +d


def _format_decimal(d: Decimal) -> str:
    if d.is_zero():
        return "0"
    if -8 <= d.adjusted() <= 40:
        return format(d, "f")
    return format(d, "e")


def to_decimal_string(x, digits: int) -> str:
    """Render a real or complex value rounded to ``digits`` significant digits."""
    if is_complex(x):
        z = _exact_mpc(x)
        re = _format_decimal(round_significant(z.real, digits))
        im_d = round_significant(z.imag, digits)
        sign = "-" if im_d.is_signed() and not im_d.is_zero() else "+"
        return f"{re}{sign}{_format_decimal(im_d.copy_abs())}i"
    return _format_decimal(round_significant(x, digits))


def _exact_mpc(x):
    # mpc(x) would round to the ambient precision, often just 53 bits
    if isinstance(x, mpc):
        return x
    if isinstance(x, str):
        x = exact_decimal(x)
    if isinstance(x, Decimal):
        with mp.workdps(len(x.as_tuple().digits) + 5):
            return mpc(mp.mpf(str(x)))
    if isinstance(x, mpf):
        with mp.workprec(max(mp.prec, x._mpf_[3] + 1)):
            return mpc(x)
    return mpc(x)


def _string_digits(text: str) -> int:
    mantissa = text.strip().lstrip("+-").lower().split("e")[0].replace(".", "")
    return max(len(mantissa.lstrip("0")), 1)


def _agreed_real(a, b, cap: int) -> int:
    da, db = exact_decimal(a), exact_decimal(b)
    if da == db:
        return cap
    if da.is_zero() or db.is_zero() or da.is_signed() != db.is_signed():
        return 0
    diff = abs(da - db)
    upper = max(da.adjusted(), db.adjusted()) + 2 - diff.adjusted()
    for d in range(min(cap, upper), 0, -1):
        if round_significant(da, d) == round_significant(db, d):
            return d
    return 0


def agreed_digits(a, b, cap: int | None = None) -> int:
    """Largest D such that ``a`` and ``b`` round to the same D significant digits.

    ``cap`` defaults to the smaller operand precision: the digit count of a
    decimal string operand, otherwise the current working precision.
    Complex operands are compared componentwise and the minimum is returned.
    """
    if cap is None:
        cap = min(_string_digits(v) if isinstance(v, str) else mp.dps for v in (a, b))
    if is_complex(a) or is_complex(b):
        za, zb = _exact_mpc(a), _exact_mpc(b)
        return min(_agreed_real(za.real, zb.real, cap), _agreed_real(za.imag, zb.imag, cap))
    return _agreed_real(a, b, cap)


class Stabilized(NamedTuple):
    value: Number
    certified_digits: int


def stabilize(task: Callable[[int], Number], ctx: PrecCtx) -> Stabilized:
    """Run ``task`` at two working precisions and count the agreeing digits.

    ``task`` receives the working precision in decimal digits and runs with
    mpmath's precision already set to it. The higher-precision result is
    returned.
    """
    with mp.workdps(ctx.working):
        low = task(ctx.working)
    with mp.workdps(ctx.confirm):
        high = task(ctx.confirm)
    return Stabilized(high, agreed_digits(low, high, cap=ctx.working))


def const_pi() -> mpf:
    # mpmath caches the constant per precision level.
    return +mp.pi


def const_e() -> mpf:
    return +mp.e


def eps() -> mpf:
    """Relative resolution of the current working precision."""
    return mpf(2) ** (1 - mp.prec)


def certify(task: Callable[[int], Number], ctx: PrecCtx, attempts: int = 3) -> Stabilized:
    """Like :func:`stabilize`, widening the guard until ``ctx.digits`` are certified."""
    current = ctx
    for _ in range(attempts):
        result = stabilize(task, current)
        if result.certified_digits >= ctx.digits:
            return result
        current = PrecCtx(current.digits, 2 * current.guard + current.ladder_step,
                          current.ladder_step)
    raise NonConvergenceError(
        f"only {result.certified_digits} of {ctx.digits} digits certified "
        f"after widening the guard to {current.guard}")
