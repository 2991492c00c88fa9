"""Arbitrary-precision special functions: erf/erfc, Gamma and the incomplete Gammas.

Only mpmath's elementary arithmetic (field operations, sqrt, exp, expm1,
log, power, sinpi and Euler's constant) is used; the special functions
themselves are computed here.
Each function comes in two layers: an underscore kernel that evaluates at
the current mpmath precision (used by the expression evaluator inside its
own precision ladder) and a public wrapper that certifies the result against
a :class:`~constforge.numkern.PrecCtx`.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

from mpmath import mp, mpc, mpf

from . import cfrac
from .numkern import (
    DomainError,
    NonConvergenceError,
    Number,
    PoleError,
    PrecCtx,
    certify,
    eps,
    to_number,
)

SERIES_TERM_CAP = 200_000
CANCELLATION_RETRIES = 4

_spouge_cache: dict = {}
_spouge_lock = threading.Lock()


@dataclass(frozen=True)
class SpecialValue:
    value: Number
    certified_digits: int
    method: str


def double_factorial(n: int) -> int:
    if n < -1:
        raise DomainError(f"double factorial undefined for n = {n}")
    result = 1
    while n > 1:
        result *= n
        n -= 2
    return result


def _re(z):
    return z.real if isinstance(z, mpc) else z


def _is_nonpositive_integer(s) -> bool:
    if isinstance(s, mpc):
        if s.imag != 0:
            return False
        s = s.real
    return s <= 0 and s == int(s)


def _extra_digits(x) -> int:
    return int(abs(x) * 0.87) + 5


# -- error function ---------------------------------------------------------

def _erf(z):
    z = to_number(z)
    if z == 0:
        return z * 0
    with mp.workdps(mp.dps + int(abs(z) ** 2 * 0.4343) + 5):
        z2 = z * z
        term = z
        total = z
        n = 0
        tol = eps()
        while True:
            n += 1
            term *= -z2 / n
            contrib = term / (2 * n + 1)
            total += contrib
            if n > abs(z2) and abs(contrib) <= tol * abs(total):
                break
            if n > SERIES_TERM_CAP:
                raise NonConvergenceError("erf Taylor series did not converge")
        result = 2 * total / mp.sqrt(mp.pi)
    return +result


def _erfc_route(z) -> str:
    if isinstance(z, mpc) or abs(z) <= 1:
        return "taylor"
    return "upper_gamma"


def _erfc(z):
    z = to_number(z)
    if _erfc_route(z) == "taylor":
        with mp.workdps(mp.dps + 5):
            return +(1 - _erf(z))
    with mp.workdps(mp.dps + 5):
        tail = _gamma_upper(mpf(1) / 2, z * z) / mp.sqrt(mp.pi)
        result = tail if z > 0 else 2 - tail
    return +result


def erf(z, ctx: PrecCtx) -> SpecialValue:
    value, digits = certify(lambda _w: _erf(z), ctx)
    return SpecialValue(value, digits, "taylor")


def erfc(z, ctx: PrecCtx) -> SpecialValue:
    value, digits = certify(lambda _w: _erfc(z), ctx)
    with mp.workdps(ctx.working):
        method = "taylor" if _erfc_route(to_number(z)) == "taylor" else "cf_lentz"
    return SpecialValue(value, digits, method)


# -- Gamma (Spouge) ---------------------------------------------------------

def spouge_parameter(digits: int) -> int:
    return math.ceil(1.3 * digits)


def _spouge_coefficients(a: int, prec: int):
    key = (a, prec)
    with _spouge_lock:
        cached = _spouge_cache.get(key)
    if cached is not None:
        return cached
    with mp.workprec(prec):
        coeffs = [mp.sqrt(2 * mp.pi)]
        fact = 1
        for k in range(1, a):
            c = mp.power(a - k, k - mpf(1) / 2) * mp.exp(a - k) / fact
            coeffs.append(c if k % 2 else -c)
            fact *= k
    with _spouge_lock:
        _spouge_cache.setdefault(key, coeffs)
    return coeffs


def _spouge(z):
    """Gamma(z + 1) for Re(z) > 0."""
    a = spouge_parameter(mp.dps)
    # The alternating coefficient sum cancels about a*log10(2*pi) digits.
    prec = mp.prec + int(a * 2.65) + 32
    coeffs = _spouge_coefficients(a, prec)
    with mp.workprec(prec):
        total = coeffs[0]
        for k in range(1, a):
            total += coeffs[k] / (z + k)
        za = z + a
        result = mp.power(za, z + mpf(1) / 2) * mp.exp(-za) * total
    return +result


def _gamma_route(s) -> str:
    return "reflection" if _re(s) <= 0 else "spouge"


def _gamma(s):
    s = to_number(s)
    if _is_nonpositive_integer(s):
        raise PoleError(f"Gamma has a pole at {s}")
    if _gamma_route(s) == "reflection":
        with mp.workdps(mp.dps + 10):
            result = mp.pi / (mp.sinpi(s) * _gamma(1 - s))
        return +result
    with mp.workdps(mp.dps + 5):
        result = _spouge(s) / s
    return +result


def gamma(s, ctx: PrecCtx) -> SpecialValue:
    value, digits = certify(lambda _w: _gamma(s), ctx)
    with mp.workdps(ctx.working):
        method = _gamma_route(to_number(s))
    return SpecialValue(value, digits, method)


# -- incomplete Gamma -------------------------------------------------------

def _lower_series_sum(s, x):
    """x^s e^{-x} sum_n x^n / (s (s+1) ... (s+n))."""
    term = 1 / s
    total = term
    tol = eps()
    n = 0
    while True:
        n += 1
        term *= x / (s + n)
        total += term
        if abs(term) <= tol * abs(total) and 2 * abs(x) < abs(s + n + 1):
            break
        if n > SERIES_TERM_CAP:
            raise NonConvergenceError("incomplete gamma series did not converge")
    return mp.power(x, s) * mp.exp(-x) * total


def _upper_cf(s, x):
    """Legendre continued fraction for Gamma(s, x), Re(x) > 0."""
    def coeffs(n):
        if n == 1:
            return 1, x + 1 - s
        return -(n - 1) * (n - 1 - s), x + 2 * n - 1 - s

    value, _ = cfrac.lentz_value(cfrac.GeneralizedCF(0, coeffs))
    return mp.power(x, s) * mp.exp(-x) * value


def _in_cf_region(s, x) -> bool:
    return _re(x) > 0 and abs(x) > _re(s) + 1


def _difference(minuend, subtrahend):
    """minuend() - subtrahend(), re-evaluated at higher precision on heavy cancellation."""
    target = mp.dps
    extra = 10
    for _ in range(CANCELLATION_RETRIES):
        with mp.workdps(target + extra):
            a = minuend()
            b = subtrahend()
            result = a - b
            scale = max(abs(a), abs(b))
            if result != 0 and scale != 0:
                lost = int(mp.log10(scale / abs(result))) + 1
            else:
                lost = target + extra  # everything cancelled: double the guard
        if lost <= extra - 5:
            return +result
        extra = lost + 10
    raise NonConvergenceError("catastrophic cancellation in Gamma(s) - incomplete part")


def _near_pole(s):
    """k when s lies within 1/4 of the pole -k of Gamma (k >= 0), else None."""
    k = -int(mp.nint(_re(s)))
    if k < 0 or abs(s + k) >= mpf(1) / 4:
        return None
    return k


def _upper_route(s, x) -> str:
    if _in_cf_region(s, x):
        return "cf_lentz"
    if _near_pole(s) is not None:
        return "pole_split"
    if _re(s) < 0:
        return "recurrence_shift"
    return "taylor"


def _pole_split(s, x, k):
    """Gamma(s, x) for s = -k + eps with the pole of Gamma(s) cancelled analytically.

    Gamma(s) minus the n = k term of the alternating series for gamma(s, x)
    equals (-1)^k/k! [(Gamma(1+eps) Q(eps) - 1)/eps - (x^eps - 1)/eps] with
    Q(eps) = prod_{i<=k} 1/(1 - eps/i). At eps = 0 the bracket becomes
    H_k - euler - ln x.
    """
    eps_ = s + k
    lx = mp.log(x)
    tiny = abs(eps_) < mpf(10) ** -(mp.dps + 5)
    if eps_ == 0 or tiny:
        head = sum(mpf(1) / i for i in range(1, k + 1)) - mp.euler - lx
    else:
        boost = max(0, int(-mp.log10(abs(eps_)))) + 10
        with mp.workdps(mp.dps + boost):
            q = mpf(1)
            for i in range(1, k + 1):
                q *= 1 - eps_ / i
            g = (_gamma(1 + eps_) / q - 1) / eps_
        head = g - mp.expm1(eps_ * lx) / eps_
    head *= mpf(-1) ** k / math.factorial(k)
    tol = eps()
    total = 0
    term = mpf(1)  # (-x)^n / n!
    n = 0
    while True:
        if n != k:
            piece = term / (s + n)
            total += piece
            if n > k and n > 2 * abs(x) and abs(piece) <= tol * abs(total):
                break
        n += 1
        term *= -x / n
        if n > SERIES_TERM_CAP:
            raise NonConvergenceError("incomplete gamma series did not converge")
    return head - mp.power(x, s) * total


def _gamma_upper(s, x):
    s, x = to_number(s), to_number(x)
    if x == 0:
        if _re(s) > 0:
            return _gamma(s)
        raise DomainError(f"Gamma({s}, 0) diverges for Re(s) <= 0")
    route = _upper_route(s, x)
    if route == "cf_lentz":
        with mp.workdps(mp.dps + 10):
            return +_upper_cf(s, x)
    if route == "pole_split":
        with mp.workdps(mp.dps + _extra_digits(x) + 10):
            result = _pole_split(s, x, _near_pole(s))
        return +result
    if route == "recurrence_shift":
        m = math.ceil(-_re(s))
        with mp.workdps(mp.dps + 10 + 2 * m):
            g = _gamma_upper(s + m, x)
            for j in range(m - 1, -1, -1):
                t = s + j
                g = (g - mp.power(x, t) * mp.exp(-x)) / t
        return +g
    with mp.workdps(mp.dps + _extra_digits(x)):
        result = _difference(lambda: _gamma(s), lambda: _lower_series_sum(s, x))
    return +result


def _lower_route(s, x) -> str:
    return "cf_lentz" if _in_cf_region(s, x) else "taylor"


def _gamma_lower(s, x):
    s, x = to_number(s), to_number(x)
    if _is_nonpositive_integer(s):
        raise PoleError(f"lower incomplete gamma has a pole at s = {s}")
    if x == 0:
        if _re(s) > 0:
            return x * 0
        raise DomainError(f"gamma({s}, 0) diverges for Re(s) <= 0")
    if _lower_route(s, x) == "taylor":
        with mp.workdps(mp.dps + _extra_digits(x)):
            result = _lower_series_sum(s, x)
        return +result
    return _difference(lambda: _gamma(s), lambda: _upper_cf(s, x))


def gamma_upper(s, x, ctx: PrecCtx) -> SpecialValue:
    value, digits = certify(lambda _w: _gamma_upper(s, x), ctx)
    with mp.workdps(ctx.working):
        method = _upper_route(to_number(s), to_number(x))
    return SpecialValue(value, digits, method)


def gamma_lower(s, x, ctx: PrecCtx) -> SpecialValue:
    value, digits = certify(lambda _w: _gamma_lower(s, x), ctx)
    with mp.workdps(ctx.working):
        method = _lower_route(to_number(s), to_number(x))
    return SpecialValue(value, digits, method)


# -- series -----------------------------------------------------------------

def _series_double_factorial(x):
    x = to_number(x)
    with mp.workdps(mp.dps + int(abs(x) * 0.22) + 5):
        term = mpf(1)
        total = mpf(1)
        tol = eps()
        n = 0
        while True:
            n += 1
            term *= x / (2 * n + 1)
            total += term
            # stop once terms are negligible and the remaining ratio is below 1/2
            if abs(term) < tol * max(1, abs(total)) and 2 * abs(x) < 2 * n + 3:
                break
            if n > SERIES_TERM_CAP:
                raise NonConvergenceError("double-factorial series did not converge")
    return +total


def series_double_factorial(x, ctx: PrecCtx) -> SpecialValue:
    """sum_{n>=0} x^n / (2n+1)!!"""
    value, digits = certify(lambda _w: _series_double_factorial(x), ctx)
    return SpecialValue(value, digits, "direct_series")


def _t_series(nu, x):
    """sum_{k>=0} x^k / Gamma(nu + k); terms at poles of Gamma are zero."""
    nu, x = to_number(nu), to_number(x)
    with mp.workdps(mp.dps + 10):
        if _is_nonpositive_integer(nu):
            k = int(1 - _re(nu))
            rgamma = mpf(1)
        else:
            k = 0
            rgamma = 1 / _gamma(nu)
        if x == 0:
            return +(rgamma if k == 0 else x * 0)
        xk = mp.power(x, k)
        total = xk * rgamma
        tol = eps()
        while True:
            rgamma /= nu + k
            k += 1
            xk *= x
            term = xk * rgamma
            total += term
            if abs(term) <= tol * abs(total) and 2 * abs(x) < abs(nu + k):
                break
            if k > SERIES_TERM_CAP:
                raise NonConvergenceError("T series did not converge")
    return +total


def t_series(nu, x, ctx: PrecCtx) -> SpecialValue:
    value, digits = certify(lambda _w: _t_series(nu, x), ctx)
    return SpecialValue(value, digits, "direct_series")
