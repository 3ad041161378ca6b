"""Constructive Hyers projections on Z^d: dyadic additive part, character twist, quadratic split."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .deviation import cauchy_defect
from .errors import NotLattice, Overflow, UnboundedCauchyDefect, ZeroCharacter, InvalidParams
from .funcspace.core import DEFAULT_SCHEDULE, GFunction, combine, overflow_mask, sup_norm, values_auto
from .funcspace.descriptors import (
    Additive,
    Character,
    Const,
    Desc,
    ExpChar,
    FiniteChar,
    Pow,
    Prod,
    Zero,
    complex_to_json,
)
from . import hiprec

MAX_DEPTH = 40
CHECK_RADIUS = 32
DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class HyersResult:
    coeffs: tuple
    delta: float
    residual_bound: float
    iterations: int

    @property
    def additive(self) -> Additive:
        return Additive(self.coeffs)

    def to_json(self) -> dict:
        return {
            "coeffs": [complex_to_json(c) for c in self.coeffs],
            "delta": self.delta,
            "residual_bound": self.residual_bound,
            "iterations": self.iterations,
        }


def _dyadic_limit(f: GFunction, j: int, depth: int, tol: float, delta: float):
    """Iterate c_n = f(2^n e_j) / 2^n; returns (limit, iterations).

    Since |f - a| <= delta, the iterate c_n is within delta / 2^n of the limit, so the
    iteration stops at the first n with delta / 2^n <= tol (or at the depth cap).
    """
    d = f.group.dim
    for sign in (1, -1):
        pts = np.zeros((depth + 1, d), dtype=np.int64)
        pts[:, j] = sign * (np.int64(1) << np.arange(depth + 1, dtype=np.int64))
        if overflow_mask([f], pts).any():
            continue
        vals, _ = values_auto(f, pts)
        for n in range(1, depth + 1):
            if delta / float(1 << n) <= tol or n == depth:
                return sign * hiprec.to_complex(vals[n]) / float(1 << n), n
    raise Overflow(f"dyadic iterates of generator {j} leave double range in both directions")


def additive_part(f: GFunction, depth: int = MAX_DEPTH, tol: float = DEFAULT_TOL, schedule=DEFAULT_SCHEDULE, strict: bool = True) -> HyersResult:
    """Additive a with |f - a| <= delta, delta the sup of the Cauchy defect of f.

    With strict=False only an Unbounded Cauchy verdict is rejected (an Inconclusive one
    is accepted); callers that certify the result independently use this for fitting.
    """
    if not 1 <= depth <= MAX_DEPTH:
        raise InvalidParams(f"depth must be in 1..{MAX_DEPTH}")
    report = cauchy_defect(f, schedule)
    verdict = report.verdict()
    if verdict.unbounded or (strict and not verdict.bounded):
        raise UnboundedCauchyDefect(f"Cauchy defect is {verdict.kind} (trace {list(verdict.trace)})")
    delta = report.sup
    group = f.group
    if not group.is_lattice:
        # every additive function on a finite group vanishes
        return HyersResult((), delta, sup_norm(f, 0)[0], 0)
    coeffs, iterations = [], 0
    for j in range(group.dim):
        c, n = _dyadic_limit(f, j, depth, tol, delta)
        coeffs.append(c + 0j)
        iterations = max(iterations, n)
    residual = combine(group, [(1, f), (-1, GFunction(group, Additive(coeffs)))])
    return HyersResult(tuple(coeffs), delta, sup_norm(residual, CHECK_RADIUS)[0], iterations)


def inverse_multiplicative(d: Desc) -> Desc:
    """Descriptor of 1/m for a multiplicative descriptor m."""
    if isinstance(d, Zero):
        raise ZeroCharacter("the zero function has no inverse")
    if isinstance(d, Const):
        if d.c == 0:
            raise ZeroCharacter("the zero function has no inverse")
        return Const(1 / complex(d.c))
    if isinstance(d, Character):
        return Character([-a for a in d.angles])
    if isinstance(d, ExpChar):
        return ExpChar([-c for c in d.mu])
    if isinstance(d, FiniteChar):
        if any(v == 0 for v in d.values):
            raise ZeroCharacter("a multiplicative table with a zero value vanishes identically")
        return FiniteChar([1 / v for v in d.values])
    if isinstance(d, Prod):
        return Prod(tuple(inverse_multiplicative(a) for a in d.args))
    if isinstance(d, Pow):
        return Pow(inverse_multiplicative(d.inner), d.k)
    raise InvalidParams(f"{type(d).__name__} is not a multiplicative descriptor")


def twist_by_character(f: GFunction, m: GFunction) -> GFunction:
    """x -> f(x) / m(x)."""
    if f.group != m.group:
        raise InvalidParams("functions live on different groups")
    inv = inverse_multiplicative(m.desc)
    if isinstance(m.desc, Const) and m.desc.c == 1:
        return f
    if isinstance(f.desc, Prod) and m.desc in f.desc.args:
        rest = list(f.desc.args)
        rest.remove(m.desc)
        return GFunction(f.group, rest[0] if len(rest) == 1 else Prod(tuple(rest)))
    return f * GFunction(f.group, inv)


def quadratic_split(f: GFunction, m: GFunction, a: GFunction, depth: int = MAX_DEPTH, tol: float = DEFAULT_TOL, schedule=DEFAULT_SCHEDULE, strict: bool = True):
    """Split 2 f/m - a^2 = a1 + b0; returns (a1 descriptor, sup |b0| on the check window)."""
    if not f.group.is_lattice:
        raise NotLattice("quadratic_split needs a lattice group")
    r = combine(f.group, [(2, twist_by_character(f, m)), (-1, a * a)])
    res = additive_part(r, depth, tol, schedule, strict)
    a1 = Additive(res.coeffs)
    b0 = combine(f.group, [(1, r), (-1, GFunction(f.group, a1))])
    return a1, sup_norm(b0, CHECK_RADIUS)[0]
