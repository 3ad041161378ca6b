"""Functions on a group, sup norms over windows, and bounded/dependent verdicts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .. import hiprec
from ..errors import BadSchedule, InconclusiveDependence, InvalidParams, MalformedInput
from ..group_core import GroupSpec, check_element, element_to_json, norm_array, window_array
from .descriptors import (
    Additive,
    Character,
    Const,
    Desc,
    ExpChar,
    FiniteChar,
    Prod,
    Scale,
    Sum,
    Table,
    Zero,
    Pow,
    walk,
)
from .evaluation import bounds, evaluate

DEFAULT_SCHEDULE = (16, 32, 64, 128)
DEFAULT_TAU = 0.05
ZERO_TOL = 1e-12
FAR_DEPTH = 40
_COORD_LIMIT = 1 << 52


@lru_cache(maxsize=4096)
def _validate(desc: Desc, group: GroupSpec) -> None:
    for node in walk(desc):
        if isinstance(node, (Additive, Character, ExpChar)):
            if not group.is_lattice:
                raise MalformedInput(f"{type(node).__name__} is only defined on lattices")
            size = len(node.coeffs if isinstance(node, Additive) else node.angles if isinstance(node, Character) else node.mu)
            if size != group.dim:
                raise MalformedInput(f"{type(node).__name__} needs {group.dim} coefficients, got {size}")
        elif isinstance(node, (FiniteChar, Table)):
            if group.is_lattice:
                raise MalformedInput(f"{type(node).__name__} is only defined on finite groups")
            if len(node.values) != group.order:
                raise MalformedInput(f"{type(node).__name__} needs {group.order} values, got {len(node.values)}")
            if isinstance(node, FiniteChar):
                _check_finite_char(node.values, group)


def _check_finite_char(values, group: GroupSpec):
    v = np.asarray(values, dtype=np.complex128)
    t = np.array(group.table)
    defect = np.abs(v[t] - np.outer(v, v))
    if defect.max() > 1e-12:
        x, y = np.unravel_index(int(np.argmax(defect)), defect.shape)
        raise InvalidParams(f"FiniteChar values are not multiplicative at ({x}, {y})")


def _is_one(d: Desc) -> bool:
    return isinstance(d, Const) and d.c == 1


def _as_desc(value) -> Desc:
    if isinstance(value, Desc):
        return value
    return Const(value)


@dataclass(frozen=True)
class GFunction:
    """A descriptor bound to a group; callable on elements."""

    group: GroupSpec
    desc: Desc

    def __post_init__(self):
        if not isinstance(self.desc, Desc):
            raise MalformedInput("GFunction needs a descriptor")
        _validate(self.desc, self.group)

    def __call__(self, x) -> complex:
        return eval_fn(self, x)

    def _other(self, other) -> Desc:
        if isinstance(other, GFunction):
            if other.group != self.group:
                raise MalformedInput("functions live on different groups")
            return other.desc
        return _as_desc(other)

    def __add__(self, other):
        return GFunction(self.group, Sum((self.desc, self._other(other))))

    __radd__ = __add__

    def __sub__(self, other):
        return GFunction(self.group, Sum((self.desc, Scale(-1, self._other(other)))))

    def __rsub__(self, other):
        return GFunction(self.group, Sum((self._other(other), Scale(-1, self.desc))))

    def __neg__(self):
        return GFunction(self.group, Scale(-1, self.desc))

    def __mul__(self, other):
        if isinstance(other, GFunction):
            d = self._other(other)
            if isinstance(self.desc, Zero) or isinstance(d, Zero):
                return GFunction(self.group, Zero())
            if _is_one(d):
                return self
            if _is_one(self.desc):
                return other
            return GFunction(self.group, Prod((self.desc, d)))
        return GFunction(self.group, Scale(other, self.desc))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        return GFunction(self.group, Pow(self.desc, k))


def gf(group: GroupSpec, desc) -> GFunction:
    return GFunction(group, _as_desc(desc))


def combine(group: GroupSpec, terms) -> GFunction:
    """Linear combination sum c_i F_i, skipping exactly-zero coefficients."""
    parts = []
    for c, F in terms:
        d = F.desc if isinstance(F, GFunction) else _as_desc(F)
        if c == 0 or isinstance(d, Zero):
            continue
        parts.append(d if c == 1 else Scale(c, d))
    if not parts:
        return GFunction(group, Zero())
    if len(parts) == 1:
        return GFunction(group, parts[0])
    return GFunction(group, Sum(tuple(parts)))


# ---------------------------------------------------------------- evaluation helpers


def scale_of(funcs, pts: np.ndarray, key=None) -> float:
    scale = -math.inf
    for F in funcs:
        scale = max(scale, bounds(F.desc, F.group, pts, key)[1])
    return scale


def overflow_mask(funcs, pts: np.ndarray, key=None) -> np.ndarray:
    mask = np.zeros(len(pts), dtype=bool)
    for F in funcs:
        mask |= bounds(F.desc, F.group, pts, key)[2]
    return mask


def values(F: GFunction, pts: np.ndarray, prec, key=None) -> np.ndarray:
    return evaluate(F.desc, F.group, pts, prec, key)


def values_auto(F: GFunction, pts: np.ndarray, key=None):
    """Values at the precision F's own magnitudes require; returns (values, prec)."""
    prec = hiprec.choose_prec(scale_of([F], pts, key))
    return values(F, pts, prec, key), prec


def abs_values(F: GFunction, pts: np.ndarray, key=None) -> np.ndarray:
    vals, _ = values_auto(F, pts, key)
    return hiprec.abs_float(vals)


def _point_array(group: GroupSpec, x) -> np.ndarray:
    x = check_element(group, x)
    if group.is_lattice:
        return np.array([x], dtype=np.int64)
    return np.array([x], dtype=np.int64)


def eval_fn(F: GFunction, x) -> complex:
    """Value of F at the element x (high precision internally when magnitudes demand it)."""
    pts = _point_array(F.group, x)
    vals, _ = values_auto(F, pts)
    return hiprec.to_complex(vals[0])


def window_key(radius: int):
    return ("w", int(radius))


def window_points(group: GroupSpec, radius: int):
    return window_array(group, radius), window_key(radius)


def element_at(group: GroupSpec, pts: np.ndarray, i: int):
    p = pts[i]
    if group.is_lattice:
        return tuple(int(c) for c in p)
    return int(p)


def sup_norm(F: GFunction, radius: int):
    """(max |F| over window(radius), lexicographically smallest argmax element)."""
    pts, key = window_points(F.group, radius)
    a = abs_values(F, pts, key)
    i = int(np.argmax(a))
    return float(a[i]), element_at(F.group, pts, i)


# ---------------------------------------------------------------- verdicts


def check_schedule(schedule) -> tuple:
    try:
        sched = tuple(int(r) for r in schedule)
    except (TypeError, ValueError) as exc:
        raise BadSchedule(f"schedule must be a list of integers: {schedule!r}") from exc
    if len(sched) < 3:
        raise BadSchedule("schedule needs at least 3 radii")
    if sched[0] < 1 or any(b <= a for a, b in zip(sched, sched[1:])):
        raise BadSchedule(f"schedule must be strictly increasing positive radii: {sched}")
    return sched


@dataclass(frozen=True)
class BoundVerdict:
    kind: str  # "bounded" | "unbounded" | "inconclusive"
    trace: tuple  # ((radius, sup), ...)
    bound: float | None = None
    growth_ratio: float | None = None

    @property
    def bounded(self) -> bool:
        return self.kind == "bounded"

    @property
    def unbounded(self) -> bool:
        return self.kind == "unbounded"

    def to_json(self) -> dict:
        out = {"verdict": self.kind, "trace": [[r, s] for r, s in self.trace]}
        if self.bound is not None:
            out["bound"] = self.bound
        if self.growth_ratio is not None:
            out["growth_ratio"] = self.growth_ratio
        return out


def verdict_from_trace(trace, tau: float = DEFAULT_TAU, finite: bool = False) -> BoundVerdict:
    trace = tuple((int(r), float(s)) for r, s in trace)
    sups = [s for _, s in trace]
    if finite or all(s <= ZERO_TOL for s in sups):
        return BoundVerdict("bounded", trace, bound=max(sups))
    ratios = []
    for prev, cur in zip(sups, sups[1:]):
        if prev == 0:
            ratios.append(math.inf if cur > 0 else 1.0)
        else:
            ratios.append(cur / prev)
    if ratios[-1] <= 1 + tau:
        return BoundVerdict("bounded", trace, bound=max(sups))
    if all(r >= 1 + 3 * tau for r in ratios):
        return BoundVerdict("unbounded", trace, growth_ratio=ratios[-1])
    return BoundVerdict("inconclusive", trace, growth_ratio=ratios[-1])


def sup_trace(F: GFunction, schedule) -> tuple:
    """Per-radius sups of |F| from a single evaluation on the largest window."""
    schedule = check_schedule(schedule)
    pts, key = window_points(F.group, schedule[-1])
    a = abs_values(F, pts, key)
    norms = norm_array(F.group, pts)
    return tuple((r, float(a[norms <= r].max())) for r in schedule)


def boundedness(F: GFunction, schedule=DEFAULT_SCHEDULE, tau: float = DEFAULT_TAU) -> BoundVerdict:
    if tau <= 0:
        raise BadSchedule("tau must be positive")
    return verdict_from_trace(sup_trace(F, schedule), tau, finite=not F.group.is_lattice)


# ---------------------------------------------------------------- least squares


def far_points(group: GroupSpec, radius: int, depth: int = FAR_DEPTH) -> np.ndarray:
    """Dyadic probes +-2^k radius e_j (k = 1..depth) kept inside +-2^52."""
    if not group.is_lattice:
        return np.zeros((0,), dtype=np.int64)
    rows = []
    for k in range(1, depth + 1):
        c = (1 << k) * max(radius, 1)
        if c > _COORD_LIMIT:
            break
        for j in range(group.dim):
            for sign in (1, -1):
                p = [0] * group.dim
                p[j] = sign * c
                rows.append(p)
    return np.array(rows, dtype=np.int64).reshape(-1, group.dim)


@lru_cache(maxsize=64)
def _probe_cached(group: GroupSpec, radius: int) -> np.ndarray:
    w = window_array(group, radius)
    if not group.is_lattice:
        return w
    out = np.concatenate([w, far_points(group, radius)])
    out.setflags(write=False)
    return out


def probe_points(group: GroupSpec, radius: int):
    return _probe_cached(group, radius), ("probe", int(radius))


def least_squares(target: GFunction, columns, radius: int):
    """Ordinary least squares of target against columns over the window plus dyadic probes.

    Points where any function overflows are dropped. Solved in high precision; returns
    the mpc coefficients (callers snap them to doubles).
    """
    group = target.group
    pts, key = probe_points(group, radius)
    funcs = [target, *columns]
    mask = overflow_mask(funcs, pts, key)
    if mask.any():
        pts = pts[~mask]
        key = key + (mask.tobytes(),)
    scale = max(scale_of(funcs, pts, key), 0.0)
    prec = hiprec.choose_prec(2 * scale + 64) or hiprec.MIN_PREC
    prec = max(prec, 192)
    with hiprec.working(prec):
        cols = [values(c, pts, prec, key) for c in columns]
        y = values(target, pts, prec, key)
        return hiprec.lstsq(cols, y)


@dataclass(frozen=True)
class DependenceFit:
    kind: str  # "dependent" | "independent"
    verdict: BoundVerdict
    residual: GFunction = field(repr=False)
    lam: complex | None = None
    alpha: complex | None = None
    beta: complex | None = None

    @property
    def dependent(self) -> bool:
        return self.kind == "dependent"

    @property
    def residual_bound(self):
        return self.verdict.bound

    @property
    def residual_growth(self):
        return self.verdict.growth_ratio

    def to_json(self) -> dict:
        from .descriptors import complex_to_json

        out = {"verdict": self.kind, "residual": self.verdict.to_json()}
        for name in ("lam", "alpha", "beta"):
            v = getattr(self, name)
            if v is not None:
                out["lambda" if name == "lam" else name] = complex_to_json(v)
        if self.dependent:
            out["residual_bound"] = self.residual_bound
        else:
            out["residual_growth"] = self.residual_growth
        return out


def _same_group(*funcs):
    g = funcs[0].group
    if any(F.group != g for F in funcs):
        raise MalformedInput("functions live on different groups")
    return g


def _decide(verdict: BoundVerdict, what: str):
    if verdict.kind == "inconclusive":
        raise InconclusiveDependence(f"boundedness of {what} is inconclusive", verdict.trace)
    return "dependent" if verdict.bounded else "independent"


def dependence_mod_bounded(f: GFunction, h: GFunction, schedule=DEFAULT_SCHEDULE, tau: float = DEFAULT_TAU) -> DependenceFit:
    """Decide whether h = lambda f + (bounded) and fit lambda."""
    group = _same_group(f, h)
    schedule = check_schedule(schedule)
    f_sup = sup_norm(f, schedule[-1])[0]
    if f_sup <= ZERO_TOL:
        lam = 0j
    else:
        (c,) = least_squares(h, [f], schedule[-1])
        lam = hiprec.snap(c)
    residual = combine(group, [(1, h), (-lam, f)])
    verdict = boundedness(residual, schedule, tau)
    return DependenceFit(_decide(verdict, "h - lambda f"), verdict, residual, lam=lam)


def triple_dependence(g: GFunction, f: GFunction, h: GFunction, schedule=DEFAULT_SCHEDULE, tau: float = DEFAULT_TAU) -> DependenceFit:
    """Decide whether g = alpha f + beta h + (bounded) and fit alpha, beta."""
    group = _same_group(g, f, h)
    schedule = check_schedule(schedule)
    if sup_norm(g, schedule[-1])[0] <= ZERO_TOL:
        alpha = beta = 0j
    else:
        ca, cb = least_squares(g, [f, h], schedule[-1])
        alpha, beta = hiprec.snap(ca), hiprec.snap(cb)
    residual = combine(group, [(1, g), (-alpha, f), (-beta, h)])
    verdict = boundedness(residual, schedule, tau)
    return DependenceFit(_decide(verdict, "g - alpha f - beta h"), verdict, residual, alpha=alpha, beta=beta)


def element_json(group: GroupSpec, x):
    return element_to_json(group, x)
