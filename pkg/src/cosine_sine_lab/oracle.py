"""Brute-force cross-checks: double-loop deviation, homomorphism enumeration, round trips."""

from __future__ import annotations

import cmath
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .classifier import CaseReport, Tolerances, classify
from .errors import InvalidParams, MalformedInput, NotFinite, TooLarge
from .families import DRAW_CASES, construct_case, draw_params
from .funcspace.core import DEFAULT_SCHEDULE, GFunction
from .funcspace.descriptors import Table
from .group_core import GroupSpec, generators, lattice
from .rng import SplitMix

MAX_ENUM_ORDER = 12
PARAM_TOL = 1e-2


def _table_values(F, group: GroupSpec) -> list:
    desc = F.desc if isinstance(F, GFunction) else F
    if not isinstance(desc, Table):
        raise MalformedInput("exhaustive_deviation takes Table descriptors")
    if len(desc.values) != group.order:
        raise MalformedInput(f"table needs {group.order} values")
    return list(desc.values)


def exhaustive_deviation(group: GroupSpec, f, g, h) -> float:
    """max |f(xy) - f(x)g(y) - g(x)f(y) - h(x)h(y)| over all pairs, by a plain double loop."""
    if group.is_lattice:
        raise NotFinite("exhaustive deviation needs a finite group")
    fv, gv, hv = (_table_values(F, group) for F in (f, g, h))
    t = group.table
    best = 0.0
    for x in range(group.order):
        for y in range(group.order):
            v = abs(fv[t[x][y]] + (-(fv[x] * gv[y])) + (-(gv[x] * fv[y])) + (-(hv[x] * hv[y])))
            if v > best:
                best = v
    return best


def random_table(group: GroupSpec, rng: SplitMix, amp: float = 1.0) -> Table:
    return Table([complex(rng.uniform(-amp, amp), rng.uniform(-amp, amp)) for _ in range(group.order)])


def random_table_triple(group: GroupSpec, seed: int):
    rng = SplitMix(seed)
    return tuple(GFunction(group, random_table(group, rng)) for _ in range(3))


def _root_of_unity(k: int, n: int) -> complex:
    z = cmath.exp(2j * math.pi * k / n)
    re = 0.0 if abs(z.real) < 1e-15 else z.real
    im = 0.0 if abs(z.imag) < 1e-15 else z.imag
    return complex(re, im)


def enumerate_multiplicative(group: GroupSpec) -> list:
    """All multiplicative maps G -> C on a finite group, as Table descriptors (zero map last).

    Nonzero multiplicative maps are homomorphisms into the n-th roots of unity (n = |G|),
    so it suffices to try every exponent assignment on a generating set and keep the
    assignments that extend consistently.
    """
    if group.is_lattice:
        raise NotFinite("enumeration needs a finite group")
    n = group.order
    if n > MAX_ENUM_ORDER:
        raise TooLarge(f"order {n} exceeds {MAX_ENUM_ORDER}")
    t = group.table
    gens = generators(group)
    e = group.identity_index
    found = []
    for exps in np.ndindex(*([n] * len(gens))):
        val = [None] * n
        val[e] = 0
        queue = deque([e])
        ok = True
        while queue and ok:
            x = queue.popleft()
            for gi, k in zip(gens, exps):
                y = t[x][gi]
                v = (val[x] + k) % n
                if val[y] is None:
                    val[y] = v
                    queue.append(y)
                elif val[y] != v:
                    ok = False
                    break
        if not ok or any(v is None for v in val):
            continue
        if all(val[t[x][y]] == (val[x] + val[y]) % n for x in range(n) for y in range(n)):
            found.append(Table([_root_of_unity(v, n) for v in val]))
    found.append(Table([0j] * n))
    return found


# ---------------------------------------------------------------- round trip


@dataclass(frozen=True)
class RoundTripOutcome:
    case_in: int
    seed: int
    case_out: int | None
    also: tuple
    exact: bool
    param_error: float
    passed: bool
    wrong_case: bool
    reason: str | None = None

    def to_json(self) -> dict:
        return {
            "case_in": self.case_in,
            "seed": self.seed,
            "case_out": self.case_out,
            "also": list(self.also),
            "exact": self.exact,
            "param_error": self.param_error,
            "passed": self.passed,
            "wrong_case": self.wrong_case,
            "reason": self.reason,
        }


_SCALARS = ("lam", "alpha", "beta", "rho")


def param_error(drawn, fitted, case_out: int | None) -> float:
    """Max of |fit - true| / max(1, |true|) over scalar parameters of the matched case."""
    if fitted is None or case_out is None:
        return 0.0
    target = drawn.sub_case if drawn.case_id == 10 else drawn.case_id
    if case_out != target:
        return 0.0
    err = 0.0
    for name in _SCALARS:
        a, b = getattr(drawn, name), getattr(fitted, name)
        if a is None or b is None:
            continue
        a, b = complex(a), complex(b)
        err = max(err, abs(a - b) / max(1.0, abs(a)))
    return err


def matches(case_in: int, report: CaseReport) -> bool:
    if case_in == 10:
        return report.exact and report.classified
    return case_in in report.cases


def roundtrip(case_id: int, seed: int, noise_amp: float = 0.01, schedule=DEFAULT_SCHEDULE, tol: Tolerances | None = None, group: GroupSpec | None = None) -> RoundTripOutcome:
    """Draw parameters from the seed, construct with noisy bounded slots, classify, compare."""
    if case_id == 9:
        raise InvalidParams("case 9 is verify-only; it has no round trip")
    if case_id not in DRAW_CASES:
        raise InvalidParams(f"unknown case {case_id}")
    params = draw_params(case_id, seed, noise_amp, group or lattice(1))
    c = construct_case(params)
    report = classify(c.f, c.g, c.h, schedule, tol)
    ok = matches(case_id, report)
    err = param_error(params, report.fitted, report.case)
    return RoundTripOutcome(
        case_in=case_id,
        seed=int(seed),
        case_out=report.case,
        also=report.also,
        exact=report.exact,
        param_error=err,
        passed=ok and err <= PARAM_TOL,
        wrong_case=report.classified and not ok,
        reason=report.reason,
    )
