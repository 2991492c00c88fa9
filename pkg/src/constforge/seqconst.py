"""Encode increasing integer sequences into a constant and decode them back.

A sequence s_1, s_2, ... is encoded as

    A = sum_{n>=1} (s_n - 1) / (s_1 s_2 ... s_{n-1})

and recovered from f_1 = A by the floor recurrence

    s_n = floor(f_n),   f_{n+1} = s_n (f_n - s_n + 1),

which works as long as s_n < s_{n+1} < 2 s_n (the Bertrand window), because
then the remainder r_n = f_n - s_n stays in (0, 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import ROUND_DOWN, localcontext
from fractions import Fraction
from typing import Optional

from mpmath import mp, mpc, mpf

from .numkern import (
    DomainError,
    NonConvergenceError,
    PrecCtx,
    certify,
    exact_decimal,
    to_decimal_string,
    to_number,
)

ENCODE_TERM_CAP = 100_000

FLOOR_MISMATCH = "floor_mismatch"
R_OUT_OF_RANGE = "r_out_of_range"
PRECISION_EXHAUSTED = "precision_exhausted"


# -- sequences --------------------------------------------------------------

_primes: list = [2, 3, 5, 7, 11, 13]


def nth_prime(n: int) -> int:
    """1-based n-th prime, extending a shared sieve as needed."""
    global _primes
    while len(_primes) < n:
        limit = max(2 * _primes[-1], 64)
        sieve = bytearray([1]) * (limit + 1)
        sieve[0:2] = b"\x00\x00"
        for p in range(2, math.isqrt(limit) + 1):
            if sieve[p]:
                sieve[p * p::p] = bytearray(len(range(p * p, limit + 1, p)))
        _primes = [i for i in range(limit + 1) if sieve[i]]
    return _primes[n - 1]


@dataclass(frozen=True)
class SequenceSource:
    kind: str
    alpha: int = 0
    beta: int = 0
    values: tuple = field(default=())

    def __post_init__(self):
        if self.kind == "linear":
            if self.alpha < 1 or self.beta < 1:
                raise DomainError(f"linear sequence needs alpha >= 1 and beta >= 1, "
                                  f"got ({self.alpha}, {self.beta})")
        elif self.kind == "custom":
            if not self.values:
                raise DomainError("custom sequence is empty")
            if any(v < 1 for v in self.values):
                raise DomainError("sequence terms must be >= 1")
        elif self.kind != "primes":
            raise DomainError(f"unknown sequence kind {self.kind!r}")

    def term(self, n: int) -> int:
        """1-based term s_n."""
        if n < 1:
            raise IndexError(n)
        if self.kind == "linear":
            return self.alpha * (n - 1) + self.beta
        if self.kind == "primes":
            return nth_prime(n)
        if n > len(self.values):
            raise IndexError(f"custom sequence has only {len(self.values)} terms")
        return self.values[n - 1]

    def terms(self, start: int, stop: int) -> list:
        """s_start .. s_stop inclusive."""
        return [self.term(n) for n in range(start, stop + 1)]

    @property
    def label(self) -> str:
        if self.kind == "linear":
            return f"linear({self.alpha},{self.beta})"
        if self.kind == "primes":
            return "primes"
        return f"custom[{len(self.values)}]"


def linear(alpha: int, beta: int) -> SequenceSource:
    return SequenceSource("linear", alpha, beta)


def primes() -> SequenceSource:
    return SequenceSource("primes")


def custom(values) -> SequenceSource:
    return SequenceSource("custom", values=tuple(int(v) for v in values))


def bertrand_window(seq: SequenceSource, upto: int) -> Optional[int]:
    """Smallest n0 with s_n < s_{n+1} < 2 s_n for every n0 <= n <= upto.

    A custom sequence is only checked as far as it goes. None if no index
    qualifies.
    """
    if upto < 2:
        raise ValueError("upto must be >= 2")
    last = upto if seq.kind != "custom" else min(upto, len(seq.values) - 1)
    n0 = None
    for n in range(last, 0, -1):
        a, b = seq.term(n), seq.term(n + 1)
        if not a < b < 2 * a:
            break
        n0 = n
    return n0


# -- encoding ---------------------------------------------------------------

@dataclass(frozen=True)
class EncodedConstant:
    value: object
    terms_used: int
    tail_bound: mpf
    source: object
    certified_digits: int = 0


def _encode_sum(term_of, target_digits, cap=ENCODE_TERM_CAP):
    """Partial sums of (s_n - 1)/prod_{i<n} s_i until the geometric tail bound holds.

    Returns (value, N, tail_bound) at the current precision.
    """
    tol = mpf(10) ** (-target_digits)
    inv_prod = mpf(1)
    total = mpf(0)
    for n in range(1, cap + 1):
        s = term_of(n)
        term = (s - 1) * inv_prod
        total += term
        # term_{n+1}/term_n <= 2/s_n once s_{n+1} < 2 s_n, so s_n >= 4 gives tail < 2 term_n
        if n > 1 and abs(term) < tol and abs(s) >= 4:
            nxt = term_of(n + 1)
            if abs(nxt - 1) <= 2 * abs(s - 1):
                return total, n, 2 * abs(term)
        inv_prod /= s
    raise NonConvergenceError(f"encoding did not converge within {cap} terms")


def encode(seq: SequenceSource, ctx: PrecCtx) -> EncodedConstant:
    info = {}

    def task(w):
        value, n, tail = _encode_sum(seq.term, w)
        info.update(n=n, tail=tail)
        return value

    try:
        value, digits = certify(task, ctx)
    except IndexError as exc:
        raise NonConvergenceError(
            f"{seq.label} ran out of terms before the series converged") from exc
    return EncodedConstant(value, info["n"], info["tail"], seq, digits)


def _check_complex_params(alpha, beta):
    if alpha == 0:
        raise DomainError("alpha = 0 gives a constant sequence; nothing to encode")


def _encode_complex_kernel(alpha, beta):
    a, b = to_number(alpha), to_number(beta)
    _check_complex_params(a, b)
    return _encode_sum(lambda n: a * (n - 1) + b, mp.dps)[0]


def encode_complex(alpha, beta, ctx: PrecCtx) -> EncodedConstant:
    """A(alpha, beta) for complex alpha, beta with s_n = alpha (n-1) + beta."""
    info = {}

    def task(w):
        a, b = mpc(to_number(alpha)), mpc(to_number(beta))
        _check_complex_params(a, b)
        value, n, tail = _encode_sum(lambda k: a * (k - 1) + b, w)
        info.update(n=n, tail=tail)
        return value

    value, digits = certify(task, ctx)
    return EncodedConstant(value, info["n"], info["tail"], (alpha, beta), digits)


def encode_linear_value(alpha, beta):
    """Kernel used by the expression evaluator: A(alpha, beta) at current precision."""
    a, b = to_number(alpha), to_number(beta)
    if isinstance(a, mpc) or isinstance(b, mpc):
        return _encode_complex_kernel(a, b)
    if a == int(a) and b == int(b) and a >= 1 and b >= 1:
        return _encode_sum(linear(int(a), int(b)).term, mp.dps)[0]
    return _encode_complex_kernel(a, b).real


class PrecisionBudgetError(NonConvergenceError):
    def __init__(self, required, steps, label):
        super().__init__(f"decoding {steps} terms of {label} needs {required} digits")
        self.required = required


# -- decoding ---------------------------------------------------------------

@dataclass(frozen=True)
class DecodeStep:
    n: int
    f: object
    s: int
    r: object


@dataclass(frozen=True)
class DecodeFailure:
    index: int
    reason: str
    s: Optional[int] = None
    r: object = None


@dataclass(frozen=True)
class DecodeTrace:
    steps: tuple
    failure: Optional[DecodeFailure] = None

    @property
    def sequence(self) -> list:
        return [st.s for st in self.steps]


def advance(f, known_terms):
    """Apply f <- s (f - s + 1) with the given exact terms.

    Moves an encoded value past a prefix that lies outside the Bertrand
    window, so decoding can start at the window index.
    """
    for s in known_terms:
        f = s * (f - s + 1)
    return f


def _floor(f):
    return math.floor(f) if isinstance(f, Fraction) else int(mp.floor(f))


def _iterate(f, steps, expected=None, budget=None):
    """Shared decode loop for mpf and exact Fraction values."""
    out = []
    prev = None
    log_err = None if budget is None else -budget
    for n in range(1, steps + 1):
        if log_err is not None and log_err > -2:
            return DecodeTrace(tuple(out), DecodeFailure(n, PRECISION_EXHAUSTED))
        s = _floor(f)
        r = f - s
        if expected is not None and s != expected[n - 1]:
            return DecodeTrace(tuple(out), DecodeFailure(n, FLOOR_MISMATCH, s, r))
        if expected is None and prev is not None and s <= prev:
            return DecodeTrace(tuple(out), DecodeFailure(n, FLOOR_MISMATCH, s, r))
        if not 0 < r < 1:
            return DecodeTrace(tuple(out), DecodeFailure(n, R_OUT_OF_RANGE, s, r))
        out.append(DecodeStep(n, f, s, r))
        prev = s
        if log_err is not None:
            log_err += math.log10(s)
        f = s * (r + 1)
    return DecodeTrace(tuple(out))


def decode(f1, steps: int, ctx: PrecCtx, expected=None) -> DecodeTrace:
    """Run the floor recurrence from ``f1``.

    ``f1`` is taken to be accurate to ``ctx.digits`` significant digits; the
    loop stops with ``precision_exhausted`` when fewer than two digits of the
    fractional part remain trustworthy. ``expected`` optionally supplies the
    true terms so a wrong floor is reported as ``floor_mismatch``.
    """
    with mp.workdps(ctx.working):
        f = to_number(f1)
        if not f > 1:
            raise DomainError(f"decoding needs f1 > 1, got {f}")
        magnitude = math.log10(float(abs(f)))
        return _iterate(f, steps, expected, budget=ctx.digits - 1 - magnitude)


def required_digits(seq: SequenceSource, steps: int, start: int = 1) -> int:
    """Significant digits of A needed to decode s_start .. s_{start+steps-1}.

    Each step multiplies the error of f by s_n; four digits cover the size of
    f itself and the two fractional digits the floor needs.
    """
    budget = sum(math.log10(s) for s in seq.terms(start, start + steps - 1))
    return math.ceil(budget) + 4


def decode_sequence(seq: SequenceSource, steps: int, ctx: PrecCtx, check: bool = True):
    """Encode ``seq``, move to its Bertrand window and decode ``steps`` terms.

    Returns ``(n0, trace)``; trace step k corresponds to s_{n0+k-1}.
    """
    n0 = bertrand_window(seq, steps + 10)
    if n0 is None:
        raise DomainError(f"{seq.label} has no Bertrand window")
    need = required_digits(seq, n0 + steps - 1)
    if need > ctx.digits:
        raise PrecisionBudgetError(need, steps, seq.label)
    enc = encode(seq, ctx)
    with mp.workdps(ctx.confirm):
        f = advance(enc.value, seq.terms(1, n0 - 1))
    expected = seq.terms(n0, n0 + steps - 1) if check else None
    return n0, decode(f, steps, ctx, expected)


@dataclass(frozen=True)
class RemainderPoint:
    n: int
    r: object
    n_r: object


def remainder_profile(trace: DecodeTrace) -> list:
    if not trace.steps:
        raise ValueError("trace has no successful steps")
    return [RemainderPoint(st.n, st.r, _times(st.n, st.r)) for st in trace.steps]


def _times(n, r):
    # exact product so n r_n carries the full precision of r_n
    return n * r if isinstance(r, Fraction) else mp.fmul(n, r, exact=True)


# -- probes -----------------------------------------------------------------

def truncate_decimal(value, digits: int) -> Fraction:
    """Exact rational for ``value`` truncated toward zero to ``digits`` significant digits."""
    with localcontext() as c:
        c.prec = digits
        c.rounding = ROUND_DOWN
        return Fraction(+exact_decimal(value))


def predicted_depth(seq: SequenceSource, start: int, digits_given: int) -> int:
    """Largest k with sum_{i<k} log10 s_{start+i} <= digits_given - 1."""
    total = 0.0
    k = 0
    while True:
        total += math.log10(seq.term(start + k))
        if total > digits_given - 1:
            return k
        k += 1


@dataclass(frozen=True)
class TruncationProbe:
    failure_depth: int
    predicted_depth: int
    start: int
    failure: Optional[DecodeFailure]

    @property
    def within_tolerance(self) -> bool:
        return abs(self.failure_depth - self.predicted_depth) <= 3


def truncation_probe(seq: SequenceSource, digits_given: int, ctx: PrecCtx) -> TruncationProbe:
    """Decode the D-digit truncation of A(seq) exactly and locate where it breaks."""
    if digits_given < 8:
        raise DomainError("digits_given must be >= 8")
    n0 = bertrand_window(seq, 50)
    if n0 is None:
        raise DomainError(f"{seq.label} has no Bertrand window")
    full = make_full_context(ctx, digits_given)
    enc = encode(seq, full)
    approx = advance(truncate_decimal(enc.value, digits_given), seq.terms(1, n0 - 1))
    predicted = predicted_depth(seq, n0, digits_given)
    steps = predicted + 50
    trace = _iterate(approx, steps, seq.terms(n0, n0 + steps - 1))
    if trace.failure is None:
        raise NonConvergenceError("truncated constant decoded far past its information content")
    return TruncationProbe(trace.failure.index, predicted, n0, trace.failure)


def make_full_context(ctx: PrecCtx, digits_given: int) -> PrecCtx:
    return PrecCtx(max(ctx.digits, digits_given + 20), ctx.guard, ctx.ladder_step)


@dataclass(frozen=True)
class RationalProbe:
    p: int
    q: int
    trace: DecodeTrace
    integral: bool
    min_r: Optional[Fraction]
    below_inverse_q: bool

    @property
    def failure_index(self) -> Optional[int]:
        return self.trace.failure.index if self.trace.failure else None


def rational_probe(p: int, q: int, seq: SequenceSource, steps: int = 10_000) -> RationalProbe:
    """Iterate the recurrence exactly from f_1 = p/q against the true sequence.

    The contradiction argument says q f_n stays integral while r_n > 0 must
    shrink below 1/q; this measures both quantities along the way.
    """
    if q < 1:
        raise DomainError("q must be >= 1")
    f = Fraction(p, q)
    if not f > 1:
        raise DomainError("p/q must exceed 1")
    n0 = bertrand_window(seq, 50) or 1
    f = advance(f, seq.terms(1, n0 - 1))
    integral = (q * f).denominator == 1
    trace = _iterate(f, steps, seq.terms(n0, n0 + steps - 1))
    for st in trace.steps:
        if (q * st.f).denominator != 1:
            integral = False
    tail = trace.steps[-1] if trace.steps else None
    if tail is not None and trace.failure is not None:
        nxt = tail.s * (tail.r + 1)
        if (q * nxt).denominator != 1:
            integral = False
    rs = [st.r for st in trace.steps]
    if trace.failure is not None and trace.failure.r is not None:
        rs.append(trace.failure.r)
    min_r = min(rs) if rs else None
    below = min_r is not None and min_r < Fraction(1, q)
    return RationalProbe(p, q, trace, integral, min_r, below)


def format_value(x, digits: int) -> str:
    if isinstance(x, Fraction):
        with mp.workdps(digits + 10):
            return to_decimal_string(mpf(x.numerator) / x.denominator, digits)
    return to_decimal_string(x, digits)
