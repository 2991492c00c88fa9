"""Evaluation of expression trees at arbitrary precision."""

from __future__ import annotations

from fractions import Fraction

from mpmath import mp, mpc, mpf

from .. import cfrac, seqconst, specfun
from ..numkern import (
    DomainError,
    PrecCtx,
    Stabilized,
    certify,
    simplify,
    stabilize,
    to_number,
)
from .expr import BinOp, Const, Expression, Func, IntLit, Neg, RatLit, Var


def _as_real(value, what):
    value = simplify(value)
    if isinstance(value, mpc):
        raise DomainError(f"{what} must be real, got {value}")
    return value


def _as_int(value, what) -> int:
    value = _as_real(value, what)
    if value != int(value):
        raise DomainError(f"{what} must be an integer, got {value}")
    return int(value)


def _closed_form_A(alpha: int, beta: int):
    """Gamma(nu) [alpha T(nu - 1) + (alpha - 1) T(nu)], nu = beta/alpha, x = 1/alpha."""
    if alpha < 2 or beta < 1:
        raise DomainError(f"closed form needs alpha >= 2 and beta >= 1, got ({alpha}, {beta})")
    with mp.workdps(mp.dps + 10):
        nu = mpf(beta) / alpha
        x = mpf(1) / alpha
        bracket = alpha * specfun._t_series(mpf(beta - alpha) / alpha, x) \
            + (alpha - 1) * specfun._t_series(nu, x)
        result = specfun._gamma(nu) * bracket
    return +result


def closed_form_A(alpha: int, beta: int, ctx: PrecCtx):
    return certify(lambda _w: _closed_form_A(alpha, beta), ctx).value


def _binop(op, a, b):
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if b == 0:
            raise DomainError("division by zero")
        return a / b
    if a == 0 and _re(b) <= 0:
        raise DomainError(f"0 raised to {b}")
    return mp.power(a, b)


def _re(z):
    return z.real if isinstance(z, mpc) else z


def _func(kind, args, notes):
    if kind == "Sqrt":
        return mp.sqrt(args[0])
    if kind == "Exp":
        return mp.exp(args[0])
    if kind == "Ln":
        if args[0] == 0:
            raise DomainError("ln(0)")
        return mp.log(args[0])
    if kind == "Root":
        n = _as_int(args[0], "root index")
        if n < 1:
            raise DomainError(f"root index must be positive, got {n}")
        return mp.power(args[1], mpf(1) / n)
    if kind == "Gamma":
        notes.add(f"gamma:{specfun._gamma_route(args[0])}")
        return specfun._gamma(args[0])
    if kind == "GammaUpper":
        notes.add(f"gamma_upper:{specfun._upper_route(*args)}")
        return specfun._gamma_upper(*args)
    if kind == "GammaLower":
        notes.add(f"gamma_lower:{specfun._lower_route(*args)}")
        return specfun._gamma_lower(*args)
    if kind == "Erf":
        notes.add("erf:taylor")
        return specfun._erf(args[0])
    if kind == "Erfc":
        notes.add(f"erfc:{specfun._erfc_route(args[0])}")
        return specfun._erfc(args[0])
    if kind == "DblFactSeries":
        notes.add("dblfact_series:direct_series")
        return specfun._series_double_factorial(args[0])
    if kind == "RamanujanCF":
        notes.add("ramanujan_cf:cf_lentz")
        return cfrac.ramanujan_cf_value(_as_real(args[0], "ramanujan_cf argument"))
    if kind == "EncodeA":
        notes.add("encode_A:direct_series")
        return seqconst.encode_linear_value(*args)
    if kind == "ClosedA":
        notes.add("closed_A:t_series")
        return _closed_form_A(_as_int(args[0], "alpha"), _as_int(args[1], "beta"))
    raise DomainError(f"unknown function node {kind}")


def evaluate(node: Expression, env=None, notes=None):
    """Evaluate ``node`` at the current mpmath precision.

    ``env`` maps variable names to numbers or expressions; ``notes``, if
    given, is a set that collects the numerical method used by each special
    function node.
    """
    env = env or {}
    notes = notes if notes is not None else set()
    if isinstance(node, IntLit):
        return mpf(node.value)
    if isinstance(node, RatLit):
        if node.q == 0:
            raise DomainError("zero denominator")
        return to_number(Fraction(node.p, node.q))
    if isinstance(node, Const):
        return {"pi": lambda: +mp.pi, "e": lambda: +mp.e, "i": lambda: mpc(0, 1)}[node.name]()
    if isinstance(node, Var):
        if node.name not in env:
            raise DomainError(f"unbound variable {node.name!r}")
        bound = env[node.name]
        if isinstance(bound, (IntLit, RatLit, Const, Var, Neg, BinOp, Func)):
            return evaluate(bound, env, notes)
        return to_number(bound)
    if isinstance(node, Neg):
        return -evaluate(node.arg, env, notes)
    if isinstance(node, BinOp):
        left = evaluate(node.left, env, notes)
        right = evaluate(node.right, env, notes)
        return simplify(_binop(node.op, left, right))
    if isinstance(node, Func):
        args = [simplify(evaluate(a, env, notes)) for a in node.args]
        try:
            return simplify(_func(node.kind, args, notes))
        except ZeroDivisionError as exc:
            raise DomainError(f"division by zero in {node.kind}") from exc
    raise TypeError(f"not an expression node: {node!r}")


def eval_stabilized(expr: Expression, ctx: PrecCtx, env=None, notes=None) -> Stabilized:
    """Two-pass ladder evaluation without guard escalation."""
    return stabilize(lambda _w: evaluate(expr, env, notes), ctx)


def eval_expr(expr: Expression, ctx: PrecCtx, env=None):
    return certify(lambda _w: evaluate(expr, env), ctx).value
