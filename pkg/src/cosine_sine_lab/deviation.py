"""Bivariate deviation kernels and their sup over window pairs.

A kernel is a short list of terms, each one of c*F(xy), c*F(yx), c*F(x), c*F(y) or
c*P(x)Q(y). The scan evaluates every function once per window (the xy terms on the
doubled window), then assembles the kernel matrix row-block by row-block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import hiprec
from .errors import MalformedInput
from .funcspace.core import (
    DEFAULT_SCHEDULE,
    DEFAULT_TAU,
    GFunction,
    check_schedule,
    element_at,
    values,
    verdict_from_trace,
    window_points,
)
from .funcspace.evaluation import bounds
from .group_core import GroupSpec, check_element, element_to_json, mul, norm_array

PAIR_CAP = 10_000_000
_BLOCK_FLOAT = 1 << 20
_BLOCK_HP = 1 << 16


@dataclass(frozen=True)
class Term:
    kind: str  # "xy" | "yx" | "x" | "y" | "prod"
    coef: complex
    p: GFunction
    q: GFunction | None = None


@dataclass(frozen=True)
class DeviationReport:
    sup: float
    argmax: tuple  # (x, y)
    radius: int
    trace: tuple  # ((radius, sup), ...)
    kernel: str
    group: GroupSpec
    subsampled: bool = False
    stride: int = 1

    def verdict(self, tau: float = DEFAULT_TAU):
        return verdict_from_trace(self.trace, tau, finite=not self.group.is_lattice)

    def to_json(self) -> dict:
        x, y = self.argmax
        return {
            "sup": self.sup,
            "argmax": [element_to_json(self.group, x), element_to_json(self.group, y)],
            "radius": self.radius,
            "trace": [[r, s] for r, s in self.trace],
            "kernel": self.kernel,
            "subsampled": self.subsampled,
            "stride": self.stride,
        }


def cosine_sine_terms(f, g, h):
    return [Term("xy", 1, f), Term("prod", -1, f, g), Term("prod", -1, g, f), Term("prod", -1, h, h)]


def sine_terms(f0, g0):
    return [Term("xy", 1, f0), Term("prod", -1, f0, g0), Term("prod", -1, g0, f0)]


def cosine_terms(f0, g0):
    return [Term("xy", 1, f0), Term("prod", -1, f0, f0), Term("prod", 1, g0, g0)]


def cauchy_terms(f):
    return [Term("xy", 1, f), Term("x", -1, f), Term("y", -1, f)]


def central_terms(f):
    return [Term("xy", 1, f), Term("yx", -1, f)]


def multiplicative_terms(g):
    return [Term("xy", 1, g), Term("prod", -1, g, g)]


def _group_of(terms) -> GroupSpec:
    group = terms[0].p.group
    for t in terms:
        for F in (t.p, t.q):
            if F is not None and F.group != group:
                raise MalformedInput("kernel functions live on different groups")
    return group


# ---------------------------------------------------------------- pointwise


def kernel_point(terms, x, y) -> complex:
    """Exact-as-needed value of a kernel at one pair (x, y)."""
    group = _group_of(terms)
    x, y = check_element(group, x), check_element(group, y)
    where = {"x": x, "y": y, "xy": mul(group, x, y), "yx": mul(group, y, x)}
    pts = {k: np.array([v], dtype=np.int64) for k, v in where.items()}

    def lb(F, k):
        return bounds(F.desc, group, pts[k])[1]

    scale = -math.inf
    for t in terms:
        s = lb(t.p, "x") + lb(t.q, "y") if t.kind == "prod" else lb(t.p, t.kind)
        scale = max(scale, s + math.log2(max(abs(complex(t.coef)), 1e-300)))
    prec = hiprec.choose_prec(scale)

    def run():
        acc = 0
        for t in terms:
            if t.kind == "prod":
                v = values(t.p, pts["x"], prec)[0] * values(t.q, pts["y"], prec)[0]
            else:
                v = values(t.p, pts[t.kind], prec)[0]
            acc = acc + (hiprec.hp(t.coef) if prec else complex(t.coef)) * v
        return hiprec.to_complex(acc)

    if prec is None:
        return run()
    with hiprec.working(prec):
        return run()


def psi_point(f: GFunction, g: GFunction, h: GFunction, x, y) -> complex:
    return kernel_point(cosine_sine_terms(f, g, h), x, y)


# ---------------------------------------------------------------- pair scan


class _Scanner:
    """Evaluates kernel blocks for index sets of the largest window."""

    def __init__(self, terms, radius: int):
        self.terms = terms
        self.group = group = _group_of(terms)
        self.pts, self.key = window_points(group, radius)
        n = len(self.pts)
        needs_prod_domain = any(t.kind in ("xy", "yx") for t in terms)
        if group.is_lattice:
            self.dpts, self.dkey = window_points(group, 2 * radius)
            base = 4 * radius + 1
            weights = np.array([base ** (group.dim - 1 - j) for j in range(group.dim)], dtype=np.int64)
            self.offset = self.pts @ weights
            self.const = int(2 * radius * weights.sum())
        else:
            self.dpts, self.dkey = self.pts, self.key
            self.table = np.array(group.table, dtype=np.int64)
        scale = -math.inf
        for t in terms:
            c = math.log2(max(abs(complex(t.coef)), 1e-300))
            if t.kind == "prod":
                s = self._scale(t.p, False) + self._scale(t.q, False)
            else:
                s = self._scale(t.p, t.kind in ("xy", "yx"))
            scale = max(scale, s + c)
        self.prec = hiprec.choose_prec(scale)
        self.vals = {}
        if not needs_prod_domain:
            self.dpts = None
        self.n = n

    def _scale(self, F, on_domain):
        pts, key = (self.dpts, self.dkey) if on_domain else (self.pts, self.key)
        return bounds(F.desc, self.group, pts, key)[1]

    def _vals(self, F, on_domain):
        k = (F, on_domain)
        if k not in self.vals:
            pts, key = (self.dpts, self.dkey) if on_domain else (self.pts, self.key)
            self.vals[k] = values(F, pts, self.prec, key)
        return self.vals[k]

    def _prod_index(self, rows, cols, swap=False):
        if self.group.is_lattice:
            return self.offset[rows][:, None] + self.offset[cols][None, :] + self.const
        if swap:
            return self.table[np.ix_(cols, rows)].T
        return self.table[np.ix_(rows, cols)]

    def block(self, rows, cols) -> np.ndarray:
        acc = None
        for t in self.terms:
            coef = hiprec.hp(t.coef) if self.prec else complex(t.coef)
            if t.kind == "prod":
                v = np.multiply.outer(self._vals(t.p, False)[rows], self._vals(t.q, False)[cols])
            elif t.kind in ("xy", "yx"):
                v = self._vals(t.p, True)[self._prod_index(rows, cols, swap=t.kind == "yx")]
            elif t.kind == "x":
                v = np.repeat(self._vals(t.p, False)[rows][:, None], len(cols), axis=1)
            elif t.kind == "y":
                v = np.repeat(self._vals(t.p, False)[cols][None, :], len(rows), axis=0)
            else:
                raise MalformedInput(f"unknown kernel term {t.kind!r}")
            term = v if t.coef == 1 else (-v if t.coef == -1 else coef * v)
            acc = term if acc is None else acc + term
        return acc

    def abs_block(self, rows, cols) -> np.ndarray:
        if self.prec is None:
            return hiprec.abs_float(self.block(rows, cols))
        with hiprec.working(self.prec):
            return hiprec.abs_float(self.block(rows, cols))

    def scan_max(self, rows, cols):
        """(max |K|, row, col) over rows x cols, first occurrence in row-major order."""
        limit = _BLOCK_HP if self.prec else _BLOCK_FLOAT
        step = max(1, limit // max(len(cols), 1))
        best, bi, bj = -1.0, 0, 0
        for start in range(0, len(rows), step):
            chunk = rows[start:start + step]
            a = self.abs_block(chunk, cols)
            k = int(np.argmax(a))
            v = float(a.flat[k])
            if v > best:
                best, bi, bj = v, int(chunk[k // len(cols)]), int(cols[k % len(cols)])
        return best, bi, bj


def pair_scan(terms, schedule=DEFAULT_SCHEDULE, kernel: str = "custom", cap: int = PAIR_CAP) -> DeviationReport:
    """Sup of |kernel(x, y)| over window pairs for each radius of the schedule."""
    schedule = check_schedule(schedule)
    sc = _Scanner(terms, schedule[-1])
    group = sc.group
    norms = norm_array(group, sc.pts)
    n = sc.n
    full = n * n <= cap
    trace = []
    best, arg = -1.0, (0, 0)
    stride_used = 1
    if full:
        A = None
        limit = (_BLOCK_HP if sc.prec else _BLOCK_FLOAT) * 8
        if n * n <= limit:
            idx = np.arange(n)
            A = sc.abs_block(idx, idx)
    for r in schedule:
        sel = np.flatnonzero(norms <= r)
        if full and A is not None:
            sub = A[np.ix_(sel, sel)]
            k = int(np.argmax(sub))
            v, i, j = float(sub.flat[k]), int(sel[k // len(sel)]), int(sel[k % len(sel)])
        else:
            if len(sel) ** 2 > cap:
                stride = int(math.ceil(len(sel) / math.sqrt(cap)))
                sel = sel[::stride]
                stride_used = max(stride_used, stride)
            v, i, j = sc.scan_max(sel, sel)
        if v >= best:
            best, arg = v, (i, j)
        trace.append((r, best))
    x, y = element_at(group, sc.pts, arg[0]), element_at(group, sc.pts, arg[1])
    return DeviationReport(
        sup=best,
        argmax=(x, y),
        radius=schedule[-1],
        trace=tuple(trace),
        kernel=kernel,
        group=group,
        subsampled=stride_used > 1,
        stride=stride_used,
    )


def sup_deviation(f: GFunction, g: GFunction, h: GFunction, schedule=DEFAULT_SCHEDULE) -> DeviationReport:
    return pair_scan(cosine_sine_terms(f, g, h), schedule, "cosine_sine")


def sine_deviation(f0: GFunction, g0: GFunction, schedule=DEFAULT_SCHEDULE) -> DeviationReport:
    return pair_scan(sine_terms(f0, g0), schedule, "sine")


def cosine_deviation(f0: GFunction, g0: GFunction, schedule=DEFAULT_SCHEDULE) -> DeviationReport:
    return pair_scan(cosine_terms(f0, g0), schedule, "cosine")


def central_defect(f: GFunction, schedule=DEFAULT_SCHEDULE) -> DeviationReport:
    return pair_scan(central_terms(f), schedule, "central")


def cauchy_defect(f: GFunction, schedule=DEFAULT_SCHEDULE) -> DeviationReport:
    return pair_scan(cauchy_terms(f), schedule, "cauchy")


def multiplicativity_defect(g: GFunction, schedule=DEFAULT_SCHEDULE) -> DeviationReport:
    return pair_scan(multiplicative_terms(g), schedule, "multiplicative")
