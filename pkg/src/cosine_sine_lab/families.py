"""Constructors for the ten solution families, normal forms, and seeded parameter draws.

Each constructor assembles (f, g, h) from the printed formulas with coefficients computed
in double precision, and reports a Lipschitz constant for sup psi in the bounded slots:
sup psi <= baseline + lipschitz * eps, where eps is the largest sup norm of a bounded
slot over the doubled default window. The per-case reductions of psi used for the
constants are

    case 1: -h(x)h(y)
    case 2: f(xy) - f(x)g(y) - g(x)f(y) - h(x)h(y)          (all three bounded)
    case 3: phi(xy) - m(x)phi(y) - phi(x)m(y) - b(x)b(y)
    case 4: alpha b(x)b(y) - alpha b(xy) - phi(x)phi(y)
    case 5: -b(x)b(y)
    case 6: lambda^2 (b(xy) - b(x)b(y))
    case 7: b(xy) - m(x)b(y) - b(x)m(y) - lambda^2 m(x)m(y)
    case 8: b(xy) - m(x)b(y) - b(x)m(y)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import InvalidParams, MalformedInput
from .funcspace.core import DEFAULT_SCHEDULE, GFunction, boundedness, combine, sup_norm
from .funcspace.descriptors import (
    Additive,
    Character,
    Const,
    Desc,
    ExpChar,
    FiniteChar,
    Noise,
    Pow,
    Prod,
    Zero,
    complex_from_json,
    complex_to_json,
    desc_from_json,
    desc_to_json,
)
from .group_core import GroupSpec, group_from_json, group_to_json, lattice
from .rng import SplitMix, splitmix64

CASES = tuple(range(1, 11))
EXACT_SUBCASES = (3, 4, 5, 6, 8)
DRAW_CASES = (1, 2, 3, 4, 5, 6, 7, 8, 10)
CASE6_LAMBDAS = (0.5, 1.0, 2.0, 0.5j, 1j, 2j)


@dataclass(frozen=True)
class SineCosinePair:
    f0: GFunction
    g0: GFunction
    kind: str  # "sine" | "cosine"


@dataclass(frozen=True)
class FamilyParams:
    """Parameters of one case; unused fields stay None."""

    case_id: int
    group: GroupSpec = field(default_factory=lambda: lattice(1))
    lam: complex | None = None
    alpha: complex | None = None
    beta: complex | None = None
    rho: complex | None = None
    a: Desc | None = None
    a1: Desc | None = None
    m: Desc | None = None
    M: Desc | None = None
    b: Desc | None = None
    phi: Desc | None = None
    f0g0: SineCosinePair | None = None
    free_f: Desc | None = None
    free_g: Desc | None = None
    bounded: tuple | None = None  # case 2: the three bounded functions (f, g, h)
    sub_case: int | None = None  # case 10: which exact family to instantiate

    def to_json(self) -> dict:
        out = {"case_id": self.case_id, "group": group_to_json(self.group)}
        for name in ("lam", "alpha", "beta", "rho"):
            v = getattr(self, name)
            if v is not None:
                out["lambda" if name == "lam" else name] = complex_to_json(v)
        for name in ("a", "a1", "m", "M", "b", "phi", "free_f", "free_g"):
            v = getattr(self, name)
            if v is not None:
                out[name] = desc_to_json(v)
        if self.f0g0 is not None:
            out["f0g0"] = {"kind": self.f0g0.kind, "f0": desc_to_json(self.f0g0.f0.desc), "g0": desc_to_json(self.f0g0.g0.desc)}
        if self.bounded is not None:
            out["bounded"] = [desc_to_json(d) for d in self.bounded]
        if self.sub_case is not None:
            out["sub_case"] = self.sub_case
        return out


def params_from_json(obj) -> FamilyParams:
    if not isinstance(obj, dict):
        raise MalformedInput("family parameters must be a JSON object")
    case_id = obj.get("case_id")
    if isinstance(case_id, bool) or not isinstance(case_id, int) or case_id not in CASES:
        raise MalformedInput("'case_id' must be an integer 1..10")
    group = group_from_json(obj.get("group", {"kind": "lattice", "dim": 1}))
    kw = {"case_id": case_id, "group": group}
    for name in ("lambda", "alpha", "beta", "rho"):
        if name in obj:
            kw["lam" if name == "lambda" else name] = complex_from_json(obj[name])
    for name in ("a", "a1", "m", "M", "b", "phi", "free_f", "free_g"):
        if name in obj:
            kw[name] = desc_from_json(obj[name])
    if "f0g0" in obj:
        pair = obj["f0g0"]
        if not isinstance(pair, dict) or pair.get("kind") not in ("sine", "cosine"):
            raise MalformedInput("'f0g0' needs kind sine|cosine with f0 and g0")
        kw["f0g0"] = SineCosinePair(
            GFunction(group, desc_from_json(pair.get("f0"))), GFunction(group, desc_from_json(pair.get("g0"))), pair["kind"]
        )
    if "bounded" in obj:
        items = obj["bounded"]
        if not isinstance(items, list) or len(items) != 3:
            raise MalformedInput("'bounded' must list three descriptors")
        kw["bounded"] = tuple(desc_from_json(d) for d in items)
    if "sub_case" in obj:
        kw["sub_case"] = obj["sub_case"]
    return FamilyParams(**kw)


@dataclass(frozen=True)
class Construction:
    case_id: int
    f: GFunction
    g: GFunction
    h: GFunction
    lipschitz: float
    baseline: float
    slot_amplitude: float
    params: FamilyParams

    def __iter__(self):
        return iter((self.f, self.g, self.h, self.lipschitz))

    @property
    def triple(self):
        return self.f, self.g, self.h

    def to_json(self) -> dict:
        return {
            "group": group_to_json(self.f.group),
            "functions": {"f": desc_to_json(self.f.desc), "g": desc_to_json(self.g.desc), "h": desc_to_json(self.h.desc)},
            "meta": {
                "case_id": self.case_id,
                "lipschitz": self.lipschitz,
                "baseline": self.baseline,
                "slot_amplitude": self.slot_amplitude,
                "params": self.params.to_json(),
            },
        }


# ---------------------------------------------------------------- structural checks


def is_multiplicative(d: Desc) -> bool:
    """Structural test: descriptors built only from multiplicative pieces."""
    if isinstance(d, (Zero, Character, ExpChar, FiniteChar)):
        return True
    if isinstance(d, Const):
        return d.c in (0, 1)
    if isinstance(d, Prod):
        return all(is_multiplicative(a) for a in d.args)
    if isinstance(d, Pow):
        return is_multiplicative(d.inner)
    return False


def is_zero_function(F: GFunction) -> bool:
    return isinstance(F.desc, Zero) or sup_norm(F, DEFAULT_SCHEDULE[-1])[0] == 0


def _require(cond: bool, clause: str):
    if not cond:
        raise InvalidParams(clause)


def _need(p: FamilyParams, *names):
    for name in names:
        if getattr(p, name) is None:
            raise InvalidParams(f"case {p.case_id} needs '{'lambda' if name == 'lam' else name}'")


def _bounded_slot(group: GroupSpec, d: Desc, name: str) -> GFunction:
    F = GFunction(group, d)
    v = boundedness(F)
    _require(v.bounded, f"bounded slot '{name}' is not Bounded ({v.kind})")
    return F


def _additive(group: GroupSpec, d: Desc, name: str) -> GFunction:
    _require(isinstance(d, (Additive, Zero)), f"'{name}' must be an Additive descriptor")
    return GFunction(group, d)


def _bounded_mult(group: GroupSpec, d: Desc, name: str = "m") -> GFunction:
    _require(is_multiplicative(d), f"'{name}' must be a multiplicative descriptor")
    F = GFunction(group, d)
    _require(boundedness(F).bounded, f"'{name}' must be bounded")
    return F


def _slot_norm(F: GFunction) -> float:
    return sup_norm(F, 2 * DEFAULT_SCHEDULE[-1])[0]


# ---------------------------------------------------------------- sine / cosine builders


def sine_solution(a, m) -> SineCosinePair:
    """(a*m, m) solves f0(xy) = f0(x)g0(y) + g0(x)f0(y) when a is additive and m multiplicative."""
    if not isinstance(a, GFunction) or not isinstance(m, GFunction):
        raise InvalidParams("sine_solution takes GFunction arguments")
    _require(isinstance(a.desc, (Additive, Zero)), "sine_solution: 'a' must be additive")
    _require(is_multiplicative(m.desc), "sine_solution: 'm' must be multiplicative")
    _require(a.group == m.group, "sine_solution: functions on different groups")
    f0 = GFunction(a.group, Zero()) if isinstance(a.desc, Zero) else a * m
    return SineCosinePair(f0, m, "sine")


def cosine_solution(m1: GFunction, m2: GFunction) -> SineCosinePair:
    """((m1 + m2)/2, (m1 - m2)/(2i)) solves f0(xy) = f0(x)f0(y) - g0(x)g0(y)."""
    _require(is_multiplicative(m1.desc) and is_multiplicative(m2.desc), "cosine_solution: arguments must be multiplicative")
    _require(m1.group == m2.group, "cosine_solution: functions on different groups")
    group = m1.group
    if m1.desc == m2.desc:
        return SineCosinePair(m1, GFunction(group, Zero()), "cosine")
    f0 = combine(group, [(0.5, m1), (0.5, m2)])
    g0 = combine(group, [(-0.5j, m1), (0.5j, m2)])
    return SineCosinePair(f0, g0, "cosine")


# ---------------------------------------------------------------- construct_case


def construct_case(p: FamilyParams) -> Construction:
    if p.case_id not in CASES:
        raise InvalidParams(f"unknown case {p.case_id}")
    return _BUILDERS[p.case_id](p)


def _finish(p, f, g, h, lipschitz, eps, baseline=0.0) -> Construction:
    return Construction(p.case_id, f, g, h, float(lipschitz), float(baseline), float(eps), p)


def _case1(p):
    G = p.group
    _need(p, "b")
    h = _bounded_slot(G, p.b, "b")
    g = GFunction(G, p.free_g if p.free_g is not None else Zero())
    nh = _slot_norm(h)
    return _finish(p, GFunction(G, Zero()), g, h, nh, nh)


def _case2(p):
    G = p.group
    _need(p, "bounded")
    f, g, h = (_bounded_slot(G, d, n) for d, n in zip(p.bounded, ("f", "g", "h")))
    nf, ng, nh = _slot_norm(f), _slot_norm(g), _slot_norm(h)
    return _finish(p, f, g, h, 1 + 2 * ng + nh, max(nf, ng, nh))


def _case3(p):
    G = p.group
    _need(p, "lam", "a", "m", "b", "phi")
    lam = complex(p.lam)
    a, m = _additive(G, p.a, "a"), _bounded_mult(G, p.m)
    b, phi = _bounded_slot(G, p.b, "b"), _bounded_slot(G, p.phi, "phi")
    am = a * m
    f = combine(G, [(1, am), (1, phi)])
    g = combine(G, [(1, m), (-lam**2 / 2, am), (-lam, b), (-lam**2 / 2, phi)])
    h = combine(G, [(lam, am), (1, b), (lam, phi)])
    nb, nphi, nm = _slot_norm(b), _slot_norm(phi), _slot_norm(m)
    return _finish(p, f, g, h, 1 + 2 * nm + nb, max(nb, nphi))


def _case4(p):
    G = p.group
    _need(p, "alpha", "lam", "b", "phi")
    Md = p.M if p.M is not None else p.m
    if Md is None:
        raise InvalidParams("case 4 needs a multiplicative 'M'")
    _require(is_multiplicative(Md), "'M' must be a multiplicative descriptor")
    alpha, lam = complex(p.alpha), complex(p.lam)
    M = GFunction(G, Md)
    b, phi = _bounded_slot(G, p.b, "b"), _bounded_slot(G, p.phi, "phi")
    f = combine(G, [(alpha, M), (-alpha, b)])
    g = combine(G, [((1 - alpha * lam**2) / 2, M), ((1 + alpha * lam**2) / 2, b), (-lam, phi)])
    h = combine(G, [(alpha * lam, M), (-alpha * lam, b), (1, phi)])
    nb, nphi = _slot_norm(b), _slot_norm(phi)
    return _finish(p, f, g, h, abs(alpha) * (1 + nb) + nphi, max(nb, nphi))


def _case5(p):
    G = p.group
    _need(p, "lam", "f0g0", "b")
    _require(p.f0g0.kind == "sine", "case 5 needs a sine pair")
    lam = complex(p.lam)
    f0, g0 = p.f0g0.f0, p.f0g0.g0
    b = _bounded_slot(G, p.b, "b")
    f = f0
    g = combine(G, [(1, g0), (-lam**2 / 2, f0), (-lam, b)])
    h = combine(G, [(lam, f0), (1, b)])
    nb = _slot_norm(b)
    return _finish(p, f, g, h, nb, nb)


def _case6(p):
    G = p.group
    _need(p, "lam", "rho", "f0g0", "b")
    _require(p.f0g0.kind == "cosine", "case 6 needs a cosine pair")
    lam, rho = complex(p.lam), complex(p.rho)
    _require(lam != 0, "case 6 requires lambda != 0")
    f0, g0 = p.f0g0.f0, p.f0g0.g0
    b = _bounded_slot(G, p.b, "b")
    f = combine(G, [(-lam**2, f0), (lam**2, b)])
    g = combine(G, [((1 + rho**2) / 2, f0), (rho, g0), ((1 - rho**2) / 2, b)])
    h = combine(G, [(lam * rho, f0), (lam, g0), (-lam * rho, b)])
    nb = _slot_norm(b)
    return _finish(p, f, g, h, abs(lam) ** 2 * (1 + nb), nb)


def _case7(p):
    G = p.group
    _need(p, "lam", "beta", "M", "m", "a", "b")
    lam, beta = complex(p.lam), complex(p.beta)
    _require(lam != 0, "case 7 requires lambda != 0")
    _require(is_multiplicative(p.M), "'M' must be a multiplicative descriptor")
    M, m = GFunction(G, p.M), _bounded_mult(G, p.m)
    a, b = _additive(G, p.a, "a"), _bounded_slot(G, p.b, "b")
    am = a * m
    f = combine(G, [(lam**2, M), (1, am), (1, b)])
    g = combine(G, [(beta * lam * (1 - beta * lam / 2), M), (1 - beta * lam, m), (-(beta**2) / 2, am), (-(beta**2) / 2, b)])
    h = combine(G, [(lam * (1 - beta * lam), M), (-lam, m), (-beta, am), (-beta, b)])
    nm, nb = _slot_norm(m), _slot_norm(b)
    return _finish(p, f, g, h, 1 + 2 * nm, nb, baseline=abs(lam) ** 2 * nm**2)


def _case8(p):
    G = p.group
    _need(p, "beta", "a", "a1", "m", "b")
    beta = complex(p.beta)
    a, a1 = _additive(G, p.a, "a"), _additive(G, p.a1, "a1")
    m = _bounded_mult(G, p.m)
    _require(not is_zero_function(m), "case 8 requires m != 0")
    _require(not is_zero_function(a), "case 8 requires a != 0")
    b = _bounded_slot(G, p.b, "b")
    a2m = a * a * m
    am, a1m = a * m, a1 * m
    f = combine(G, [(0.5, a2m), (0.5, a1m), (1, b)])
    g = combine(G, [(-(beta**2) / 4, a2m), (beta, am), (-(beta**2) / 4, a1m), (1, m), (-(beta**2) / 2, b)])
    h = combine(G, [(-beta / 2, a2m), (1, am), (-beta / 2, a1m), (-beta, b)])
    nm, nb = _slot_norm(m), _slot_norm(b)
    return _finish(p, f, g, h, 1 + 2 * nm, nb)


def _case9(p):
    G = p.group
    _need(p, "free_f", "beta", "a", "m", "b")
    beta = complex(p.beta)
    f = GFunction(G, p.free_f)
    a, m = _additive(G, p.a, "a"), _bounded_mult(G, p.m)
    b = _bounded_slot(G, p.b, "b")
    g = combine(G, [(-(beta**2) / 2, f), (1, m), (beta, a * m), (beta, b)])
    h = combine(G, [(-beta, f), (1, a * m), (1, b)])
    return _finish(p, f, g, h, math.inf, _slot_norm(b))


def _case10(p):
    sub = p.sub_case
    _require(sub in EXACT_SUBCASES or sub == 7, "case 10 needs sub_case in {3, 4, 5, 6, 8} (or 7 with m = 0)")
    zero = Zero()
    inner = replace(p, case_id=sub, b=zero, phi=zero)
    if sub == 7:
        _require(isinstance(p.m, Zero) or (isinstance(p.m, Const) and p.m.c == 0), "case 7 is exact only with m = 0")
    c = construct_case(inner)
    return Construction(10, c.f, c.g, c.h, 0.0, 0.0, 0.0, p)


_BUILDERS = {1: _case1, 2: _case2, 3: _case3, 4: _case4, 5: _case5, 6: _case6, 7: _case7, 8: _case8, 9: _case9, 10: _case10}


# ---------------------------------------------------------------- dependent-branch normal forms


def lemma33_form(branch: int, p: FamilyParams):
    """Normal forms of the dependent branch (h = lambda f + phi) as (f, g, h)."""
    G = p.group
    zero = GFunction(G, Zero())
    if branch == 1:
        _need(p, "b")
        h = _bounded_slot(G, p.b, "b")
        return zero, GFunction(G, p.free_g if p.free_g is not None else Zero()), h
    if branch == 2:
        _need(p, "bounded")
        return tuple(_bounded_slot(G, d, n) for d, n in zip(p.bounded, ("f", "g", "h")))
    lam = complex(p.lam) if p.lam is not None else None
    if branch == 3:
        _need(p, "lam", "m", "phi")
        f = GFunction(G, p.free_f if p.free_f is not None else Zero())
        m, phi = _bounded_mult(G, p.m), _bounded_slot(G, p.phi, "phi")
        g = combine(G, [(1, m), (-lam, phi), (-lam**2 / 2, f)])
        h = combine(G, [(lam, f), (1, phi)])
        return f, g, h
    if branch == 4:
        c = construct_case(replace(p, case_id=4))
        return c.f, c.g, c.h
    if branch == 5:
        _need(p, "lam", "f0g0", "phi")
        f0, g0 = p.f0g0.f0, p.f0g0.g0
        phi = _bounded_slot(G, p.phi, "phi")
        g = combine(G, [(1, g0), (-lam**2 / 2, f0), (-lam, phi)])
        h = combine(G, [(lam, f0), (1, phi)])
        return f0, g, h
    raise InvalidParams(f"branch must be 1..5, got {branch}")


# ---------------------------------------------------------------- seeded draws


def _exp_mu(rng: SplitMix, sign: int = 0) -> complex:
    """Unbounded exponent: |Re mu| in {4..16}/16, Im mu uniform in [-pi, pi)."""
    s = sign or rng.choice((1, -1))
    return complex(s * rng.integer(4, 16) / 16, rng.uniform(-math.pi, math.pi))


def _noise(rng: SplitMix, amp: float, group: GroupSpec) -> Desc:
    """Noise slot; seeds whose window sups trip the growth rule are redrawn from the stream."""
    if amp == 0:
        return Zero()
    while True:
        d = Noise(rng.next_u64() >> 1, amp)
        if boundedness(GFunction(group, d)).bounded:
            return d


def draw_params(case_id: int, seed: int, amp: float = 0.01, group: GroupSpec | None = None) -> FamilyParams:
    """Deterministic parameter draw on the documented dyadic grid (Z^1 by default).

    lambda, alpha: (p + iq)/8 with modulus in [0.5, 2]; beta, rho: modulus <= 1;
    additive coefficients: modulus in [0.5, 2] (a1: <= 2); character angles uniform in
    [0, 2pi); exponential rates: |Re mu| in {4, ..., 16}/16, Im mu in [-pi, pi).
    Case 6 lambda is drawn from {1/2, 1, 2, i/2, i, 2i}.
    """
    G = group or lattice(1)
    if not G.is_lattice:
        raise InvalidParams("parameter draws are defined on lattices")
    d = G.dim
    rng = SplitMix(splitmix64(int(seed) & ((1 << 64) - 1)) ^ (case_id * 0x9E37))
    if case_id not in DRAW_CASES:
        raise InvalidParams(f"no draw grid for case {case_id}")

    def additive(lo=0.5, hi=2.0):
        return Additive([rng.dyadic_complex(lo, hi) for _ in range(d)])

    def character():
        return Character([rng.angle() for _ in range(d)])

    def expchar(sign=0):
        return ExpChar([_exp_mu(rng, sign) for _ in range(d)])

    if case_id == 1:
        return FamilyParams(1, G, free_g=Pow(additive(), 3), b=_noise(rng, amp, G))
    if case_id == 2:
        return FamilyParams(2, G, bounded=(_noise(rng, amp, G), _noise(rng, amp, G), _noise(rng, amp, G)))
    if case_id == 3:
        return FamilyParams(3, G, lam=rng.dyadic_complex(0.5, 2), a=additive(), m=character(), b=_noise(rng, amp, G), phi=_noise(rng, amp, G))
    if case_id == 4:
        return FamilyParams(4, G, alpha=rng.dyadic_complex(0.5, 2), lam=rng.dyadic_complex(0.5, 2), M=expchar(), b=_noise(rng, amp, G), phi=_noise(rng, amp, G))
    if case_id == 5:
        lam = rng.dyadic_complex(0.5, 2)
        pair = sine_solution(GFunction(G, additive()), GFunction(G, expchar()))
        return FamilyParams(5, G, lam=lam, f0g0=pair, b=_noise(rng, amp, G))
    if case_id == 6:
        lam = complex(rng.choice(CASE6_LAMBDAS))
        rho = rng.dyadic_complex(0.0, 1.0)
        pair = cosine_solution(GFunction(G, expchar(1)), GFunction(G, expchar(-1)))
        return FamilyParams(6, G, lam=lam, rho=rho, f0g0=pair, b=_noise(rng, amp, G))
    if case_id == 7:
        return FamilyParams(
            7, G, lam=rng.dyadic_complex(0.5, 2), beta=rng.dyadic_complex(0.0, 1.0), M=expchar(), m=character(), a=additive(), b=_noise(rng, amp, G)
        )
    if case_id == 8:
        return FamilyParams(8, G, beta=rng.dyadic_complex(0.0, 1.0), a=additive(), a1=additive(0.0, 2.0), m=character(), b=_noise(rng, amp, G))
    sub = rng.choice(EXACT_SUBCASES)
    inner = draw_params(sub, rng.next_u64(), 0.0, G)
    return replace(inner, case_id=10, sub_case=sub)
