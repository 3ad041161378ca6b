"""Case classification of triples with bounded deviation, and verification of claimed decompositions.

The decision tree follows the structure of the classification: first f = 0, then
dependence of h on f modulo bounded functions (cases 2-5), then dependence of g on
(f, h) (cases 6-9), with exact solutions flagged as case 10. Every proposed case is
accepted only after `verify_case` passes on the fitted parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import gmpy2
import numpy as np

from . import hiprec
from .deviation import (
    DeviationReport,
    _Scanner,
    cosine_sine_terms,
    cosine_deviation,
    multiplicativity_defect,
    pair_scan,
    sine_deviation,
    sup_deviation,
    Term,
)
from .errors import (
    DegenerateGram,
    InconclusiveDependence,
    InvalidParams,
    LabError,
    MalformedInput,
)
from .families import FamilyParams, SineCosinePair, is_multiplicative
from .funcspace.core import (
    DEFAULT_SCHEDULE,
    DEFAULT_TAU,
    ZERO_TOL,
    GFunction,
    boundedness,
    check_schedule,
    combine,
    dependence_mod_bounded,
    least_squares,
    overflow_mask,
    sup_norm,
    triple_dependence,
    values,
    values_auto,
    window_points,
)
from .funcspace.descriptors import Additive, Character, Const, ExpChar, FiniteChar, Zero, complex_to_json
from .group_core import GroupSpec, group_to_json
from .hyers import additive_part, inverse_multiplicative, quadratic_split, twist_by_character

__all__ = [
    "Tolerances",
    "Residual",
    "CaseReport",
    "classify",
    "verify_case",
    "multiplicativity_defect",
    "fit_psi_factorization",
    "psi_matrix",
    "fit_character",
    "fit_exponential",
]

_FIT_PREC = 256


@dataclass(frozen=True)
class Tolerances:
    exact: float = 1e-9  # sup psi at or below this flags an exact solution
    disc: float = 1e-6  # |2 alpha - beta^2| above this selects the cosine branch
    tau: float = DEFAULT_TAU
    identity: float = 1e-6  # identity residuals that must vanish
    mult: float = 1e-9  # multiplicativity defect of accepted m
    fit: float = 1e-6  # sup distance between an estimate and its fitted character


@dataclass(frozen=True)
class Residual:
    name: str
    kind: str  # "zero" | "bounded" | "kernel" | "mult"
    value: float
    tol: float | None
    passed: bool
    verdict: str | None = None

    def to_json(self) -> dict:
        out = {"name": self.name, "kind": self.kind, "value": self.value, "passed": self.passed}
        if self.tol is not None:
            out["tol"] = self.tol
        if self.verdict is not None:
            out["verdict"] = self.verdict
        return out


@dataclass(frozen=True)
class CaseReport:
    case: int | None
    also: tuple = ()
    reason: str | None = None
    exact: bool = False
    sup_psi: float | None = None
    fitted: FamilyParams | None = None
    residuals: tuple = ()
    windows: tuple = DEFAULT_SCHEDULE
    branch_trace: tuple = ()

    @property
    def classified(self) -> bool:
        return self.case is not None

    @property
    def cases(self) -> tuple:
        return () if self.case is None else (self.case, *self.also)

    @property
    def passed(self) -> bool:
        return self.case is not None and all(r.passed for r in self.residuals)

    def to_json(self) -> dict:
        if self.case is None:
            verdict = {"unclassified": self.reason}
        else:
            verdict = {"case": self.case, "also": list(self.also)}
        return {
            "verdict": verdict,
            "exact": self.exact,
            "sup_psi": self.sup_psi,
            "fitted": None if self.fitted is None else self.fitted.to_json(),
            "residuals": [r.to_json() for r in self.residuals],
            "windows": list(self.windows),
            "branch_trace": list(self.branch_trace),
        }


def _step(step: str, verdict: str, **vals) -> dict:
    clean = {}
    for k, v in vals.items():
        if isinstance(v, (complex, gmpy2.mpc)):
            v = complex_to_json(v)
        elif isinstance(v, tuple):
            v = [list(t) if isinstance(t, tuple) else t for t in v]
        clean[k] = v
    return {"step": step, "verdict": verdict, "values": clean}


# ---------------------------------------------------------------- coefficient arithmetic


def _hp(z):
    return hiprec.hp(z, hiprec.COEF_PREC)


def _coef(fn, *args):
    """Evaluate a coefficient expression at COEF_PREC."""
    with hiprec.working(hiprec.COEF_PREC):
        return fn(*(_hp(a) for a in args))


def _lin(group: GroupSpec, terms) -> GFunction:
    return combine(group, [(c, F) for c, F in terms if F is not None])


# ---------------------------------------------------------------- fits


def _unit(group: GroupSpec, j: int) -> np.ndarray:
    p = np.zeros((1, group.dim), dtype=np.int64)
    p[0, j] = 1
    return p


def fit_character(est: GFunction, radius: int, tol: float = 1e-6):
    """Bounded multiplicative function matching ``est`` on the window, or None.

    Returns Zero for a vanishing estimate, Const(1) for the trivial character, a
    Character on lattices (angles in [0, 2pi)) and a FiniteChar on finite groups.
    """
    group = est.group
    if sup_norm(est, radius)[0] <= ZERO_TOL:
        return Zero()
    if group.is_lattice:
        angles = []
        with hiprec.working(_FIT_PREC):
            two_pi = 2 * gmpy2.const_pi()
            for j in range(group.dim):
                v = values(est, _unit(group, j), _FIT_PREC)[0]
                if v == 0:
                    return None
                t = gmpy2.phase(v)
                if t < 0:
                    t += two_pi
                angles.append(float(t) % (2 * math.pi))
        cand = Const(1) if all(a == 0 for a in angles) else Character(angles)
    else:
        pts, key = window_points(group, 0)
        vals, _ = values_auto(est, pts, key)
        vals = hiprec.to_complex_array(vals)
        cand = FiniteChar(tuple(vals))
        if all(abs(v - 1) <= 1e-15 for v in vals):
            cand = Const(1)
    try:
        m = GFunction(group, cand)
    except LabError:
        return None
    if sup_norm(combine(group, [(1, est), (-1, m)]), radius)[0] > tol:
        return None
    return cand


def fit_exponential(F: GFunction, radius: int):
    """ExpChar estimate of the exponential driving ``F``, from the ratio F(x + e_j)/F(x).

    The ratio is taken at the farthest dyadic axis point R 2^t e_j (either sign) where F
    is still evaluable, so bounded and slower components are suppressed.
    """
    group = F.group
    if not group.is_lattice:
        return None
    mus = []
    for j in range(group.dim):
        ks = []
        t = 0
        while radius * (1 << t) < (1 << 52) and t <= 40:
            ks.extend([radius * (1 << t), -radius * (1 << t)])
            t += 1
        ks = np.array(ks, dtype=np.int64)
        pts = np.zeros((2 * len(ks), group.dim), dtype=np.int64)
        pts[0::2, j] = ks
        pts[1::2, j] = ks + 1
        ok = ~overflow_mask([F], pts).reshape(-1, 2).any(axis=1)
        if not ok.any():
            return None
        keep = np.repeat(ok, 2)
        sub = pts[keep]
        vals, prec = values_auto(F, sub)
        mags = hiprec.abs_float(vals[0::2]) if prec else np.abs(vals[0::2])
        i = int(np.argmax(mags))
        if mags[i] == 0:
            return None
        with hiprec.working(max(prec or 0, _FIT_PREC)):
            num, den = vals[2 * i + 1], vals[2 * i]
            if prec is None:
                num, den = hiprec.hp(num), hiprec.hp(den)
            mu = gmpy2.log(num / den)
            mus.append(complex(float(mu.real), float(mu.imag)))
    return ExpChar(mus)


def _fit_scalar(target: GFunction, column: GFunction, radius: int):
    (c,) = least_squares(target, [column], radius)
    return hiprec.snap(c)


def _additive_fit(F: GFunction, schedule) -> Additive:
    """Hyers additive part of F, iterated to full depth and snapped to the dyadic grid."""
    res = additive_part(F, tol=0.0, schedule=schedule, strict=False)
    return Additive([hiprec.snap(c) for c in res.coeffs])


# ---------------------------------------------------------------- verification


class _Checker:
    def __init__(self, group, schedule, tol: Tolerances):
        self.group = group
        self.schedule = schedule
        self.tol = tol
        self.radius = schedule[-1]
        self.items = []

    def zero(self, name, F: GFunction):
        v = sup_norm(F, self.radius)[0]
        self.items.append(Residual(name, "zero", v, self.tol.identity, v <= self.tol.identity))

    def bounded(self, name, F: GFunction):
        verdict = boundedness(F, self.schedule, self.tol.tau)
        v = max(s for _, s in verdict.trace)
        self.items.append(Residual(name, "bounded", v, None, verdict.bounded, verdict.kind))
        return verdict.bounded

    def kernel(self, name, report: DeviationReport, tol=None, bounded=False):
        if bounded:
            verdict = report.verdict(self.tol.tau)
            self.items.append(Residual(name, "kernel", report.sup, None, verdict.bounded, verdict.kind))
        else:
            tol = self.tol.identity if tol is None else tol
            self.items.append(Residual(name, "kernel", report.sup, tol, report.sup <= tol))

    def mult(self, name, m: GFunction):
        if not is_multiplicative(m.desc):
            self.items.append(Residual(name, "mult", math.inf, self.tol.mult, False, "not multiplicative"))
            return
        v = multiplicativity_defect(m, self.schedule).sup
        self.items.append(Residual(name, "mult", v, self.tol.mult, v <= self.tol.mult))

    def fail(self, name, why):
        self.items.append(Residual(name, "zero", math.inf, None, False, why))

    @property
    def passed(self):
        return all(r.passed for r in self.items)


def _need(p: FamilyParams, *names):
    missing = [n for n in names if getattr(p, n) is None]
    if missing:
        raise InvalidParams(f"case {p.case_id} verification needs {', '.join(missing)}")


def _check_case(k: int, p: FamilyParams, f, g, h, ck: _Checker):
    G = f.group
    Zf = GFunction(G, Zero())
    if k == 1:
        ck.zero("f", f)
        ck.bounded("h", h)
        return
    if k == 2:
        for name, F in (("f", f), ("g", g), ("h", h)):
            ck.bounded(name, F)
        return
    if k == 10:
        ck.kernel("psi", sup_deviation(f, g, h, ck.schedule), tol=ck.tol.exact)
        return
    if k == 3:
        _need(p, "lam", "a", "m")
        lam = _hp(p.lam)
        a, m = GFunction(G, p.a), GFunction(G, p.m)
        ck.mult("m", m)
        am = a * m
        phi = _lin(G, [(1, f), (-1, am)])
        ck.bounded("phi", phi)
        b = _lin(G, [(1, h), (-lam, am), (-lam, phi)])
        ck.bounded("b", b)
        half = _coef(lambda l: l * l / 2, lam)
        ck.zero("g", _lin(G, [(1, g), (-1, m), (half, am), (lam, b), (half, phi)]))
        return
    if k == 4:
        _need(p, "alpha", "lam", "M")
        alpha, lam = _hp(p.alpha), _hp(p.lam)
        if alpha == 0:
            raise InvalidParams("case 4 requires alpha != 0")
        M = GFunction(G, p.M)
        ck.mult("M", M)
        b = _lin(G, [(1, M), (_coef(lambda a: -1 / a, alpha), f)])
        ck.bounded("b", b)
        al = _coef(lambda a, l: a * l, alpha, lam)
        phi = _lin(G, [(1, h), (-al, M), (al, b)])
        ck.bounded("phi", phi)
        cM = _coef(lambda a, l: (1 - a * l * l) / 2, alpha, lam)
        cb = _coef(lambda a, l: (1 + a * l * l) / 2, alpha, lam)
        ck.zero("g", _lin(G, [(1, g), (-cM, M), (-cb, b), (lam, phi)]))
        return
    if k == 5:
        _need(p, "lam", "f0g0")
        lam = _hp(p.lam)
        f0, g0 = p.f0g0.f0, p.f0g0.g0
        ck.kernel("sine", sine_deviation(f0, g0, ck.schedule))
        ck.zero("f", _lin(G, [(1, f), (-1, f0)]))
        b = _lin(G, [(1, h), (-lam, f0)])
        ck.bounded("b", b)
        ck.zero("g", _lin(G, [(1, g), (-1, g0), (_coef(lambda l: l * l / 2, lam), f0), (lam, b)]))
        return
    if k == 6:
        _need(p, "lam", "rho", "f0g0")
        lam, rho = _hp(p.lam), _hp(p.rho)
        if lam == 0:
            raise InvalidParams("case 6 requires lambda != 0")
        f0, g0 = p.f0g0.f0, p.f0g0.g0
        ck.kernel("cosine", cosine_deviation(f0, g0, ck.schedule))
        b = _lin(G, [(_coef(lambda l: 1 / (l * l), lam), f), (1, f0)])
        ck.bounded("b", b)
        lr = _coef(lambda l, r: l * r, lam, rho)
        ck.zero("h", _lin(G, [(1, h), (-lr, f0), (-lam, g0), (lr, b)]))
        c0 = _coef(lambda r: (1 + r * r) / 2, rho)
        cb = _coef(lambda r: (1 - r * r) / 2, rho)
        ck.zero("g", _lin(G, [(1, g), (-c0, f0), (-rho, g0), (-cb, b)]))
        return
    if k == 7:
        _need(p, "lam", "beta", "M", "m", "a")
        lam, beta = _hp(p.lam), _hp(p.beta)
        M, m, a = GFunction(G, p.M), GFunction(G, p.m), GFunction(G, p.a)
        ck.mult("M", M)
        ck.mult("m", m)
        am = a * m
        b = _lin(G, [(1, f), (_coef(lambda l: -l * l, lam), M), (-1, am)])
        ck.bounded("b", b)
        cM = _coef(lambda l, bt: bt * l * (1 - bt * l / 2), lam, beta)
        hb = _coef(lambda bt: bt * bt / 2, beta)
        ck.zero("g", _lin(G, [(1, g), (-cM, M), (_coef(lambda l, bt: -(1 - bt * l), lam, beta), m), (hb, am), (hb, b)]))
        hM = _coef(lambda l, bt: l * (1 - bt * l), lam, beta)
        ck.zero("h", _lin(G, [(1, h), (-hM, M), (lam, m), (beta, am), (beta, b)]))
        return
    if k == 8:
        _need(p, "beta", "a", "a1", "m")
        beta = _hp(p.beta)
        a, a1, m = GFunction(G, p.a), GFunction(G, p.a1), GFunction(G, p.m)
        ck.mult("m", m)
        if sup_norm(m, ck.radius)[0] <= ZERO_TOL or sup_norm(a, ck.radius)[0] <= ZERO_TOL:
            ck.fail("nondegenerate", "case 8 requires m != 0 and a != 0")
            return
        a2m, am, a1m = a * a * m, a * m, a1 * m
        b = _lin(G, [(1, f), (-0.5, a2m), (-0.5, a1m)])
        ck.bounded("b", b)
        q = _coef(lambda bt: bt * bt / 4, beta)
        ck.zero("g", _lin(G, [(1, g), (q, a2m), (-beta, am), (q, a1m), (-1, m), (_coef(lambda bt: bt * bt / 2, beta), b)]))
        hb = _coef(lambda bt: bt / 2, beta)
        ck.zero("h", _lin(G, [(1, h), (hb, a2m), (-1, am), (hb, a1m), (beta, b)]))
        return
    if k == 9:
        _need(p, "beta", "a", "m")
        beta = _hp(p.beta)
        a, m = GFunction(G, p.a), GFunction(G, p.m)
        ck.mult("m", m)
        if sup_norm(m, ck.radius)[0] <= ZERO_TOL:
            ck.fail("nondegenerate", "case 9 requires m != 0")
            return
        am = a * m
        b = _lin(G, [(1, h), (beta, f), (-1, am)])
        ck.bounded("b", b)
        ck.zero("g", _lin(G, [(1, g), (_coef(lambda bt: bt * bt / 2, beta), f), (-1, m), (-beta, am), (-beta, b)]))
        minv = GFunction(G, inverse_multiplicative(p.m))
        F = _lin(G, [(1, f * minv), (-0.5, a * a)])
        bm = b * minv
        terms = [Term("xy", 1, F), Term("x", -1, F), Term("y", -1, F), Term("prod", -1, a, bm), Term("prod", -1, bm, a)]
        ck.kernel("side", pair_scan(terms, ck.schedule, "side_condition"), bounded=True)
        return
    raise InvalidParams(f"unknown case {k}")


def verify_case(case_id: int, params: FamilyParams, f, g, h, schedule=DEFAULT_SCHEDULE, tol: Tolerances | float | None = None) -> CaseReport:
    """Check each defining identity of a case for the given triple and parameters."""
    if isinstance(tol, (int, float)):
        tol = Tolerances(identity=float(tol))
    tol = tol or Tolerances()
    schedule = check_schedule(schedule)
    group = f.group
    if g.group != group or h.group != group:
        raise MalformedInput("functions live on different groups")
    if case_id not in range(1, 11):
        raise InvalidParams(f"unknown case {case_id}")
    ck = _Checker(group, schedule, tol)
    try:
        _check_case(case_id, params, f, g, h, ck)
    except (InvalidParams, MalformedInput):
        raise
    except LabError as exc:
        ck.fail("evaluation", f"{type(exc).__name__}: {exc}")
    failed = [r.name for r in ck.items if not r.passed]
    return CaseReport(
        case=None if failed else case_id,
        reason=f"failed identities: {', '.join(failed)}" if failed else None,
        fitted=params,
        residuals=tuple(ck.items),
        windows=schedule,
    )


# ---------------------------------------------------------------- classification


class _Ctx:
    def __init__(self, f, g, h, schedule, tol):
        self.f, self.g, self.h = f, g, h
        self.group = f.group
        self.schedule = schedule
        self.radius = schedule[-1]
        self.tol = tol
        self.trace = []

    def log(self, step, verdict, **vals):
        self.trace.append(_step(step, verdict, **vals))

    def attempt(self, case_id: int, params: FamilyParams):
        try:
            rep = verify_case(case_id, params, self.f, self.g, self.h, self.schedule, self.tol)
        except LabError as exc:
            self.log(f"verify case {case_id}", "error", message=str(exc))
            return None
        self.log(f"verify case {case_id}", "pass" if rep.classified else "fail", residuals=[r.to_json() for r in rep.residuals])
        return rep if rep.classified else None


def classify(f: GFunction, g: GFunction, h: GFunction, schedule=DEFAULT_SCHEDULE, tol: Tolerances | None = None) -> CaseReport:
    tol = tol or Tolerances()
    schedule = check_schedule(schedule)
    group = f.group
    if g.group != group or h.group != group:
        raise MalformedInput("functions live on different groups")
    ctx = _Ctx(f, g, h, schedule, tol)
    dev = sup_deviation(f, g, h, schedule)
    v = dev.verdict(tol.tau)
    ctx.log("psi bounded", v.kind, sup=dev.sup, trace=dev.trace)
    if v.unbounded:
        return CaseReport(None, reason="unbounded psi", sup_psi=dev.sup, windows=schedule, branch_trace=tuple(ctx.trace))
    # An inconclusive psi trace does not stop the analysis: every case accepted below has
    # passed verify_case with Bounded slots, and each case implies psi bounded.
    exact = dev.sup <= tol.exact
    ctx.log("exact", "yes" if exact else "no", sup=dev.sup)
    try:
        found = _structural(ctx)
        reason = None if found else "no case verified"
    except InconclusiveDependence as exc:
        ctx.log("dependence", "inconclusive", message=str(exc), trace=exc.trace)
        found, reason = None, "inconclusive dependence"
    except _Stop as stop:
        found, reason = None, stop.reason
    if found is None:
        if exact:
            rep = ctx.attempt(10, FamilyParams(10, group))
            if rep is not None:
                return CaseReport(10, (), None, True, dev.sup, None, rep.residuals, schedule, tuple(ctx.trace))
        if not v.bounded:
            reason = "inconclusive psi"
        return CaseReport(None, reason=reason, exact=exact, sup_psi=dev.sup, windows=schedule, branch_trace=tuple(ctx.trace))
    case_id, also, rep = found
    also = tuple(also) + ((10,) if exact and case_id != 10 else ())
    return CaseReport(case_id, also, None, exact, dev.sup, rep.fitted, rep.residuals, schedule, tuple(ctx.trace))


class _Stop(Exception):
    def __init__(self, reason):
        super().__init__(reason)
        self.reason = reason


def _structural(ctx: _Ctx):
    f, g, h, G, R = ctx.f, ctx.g, ctx.h, ctx.group, ctx.radius
    f_sup = sup_norm(f, R)[0]
    if f_sup <= ZERO_TOL:
        ctx.log("f = 0", "yes", sup=f_sup)
        rep = ctx.attempt(1, FamilyParams(1, G))
        return (1, (), rep) if rep else None
    ctx.log("f = 0", "no", sup=f_sup)
    fb = boundedness(f, ctx.schedule, ctx.tol.tau)
    hb = boundedness(h, ctx.schedule, ctx.tol.tau)
    ctx.log("f, h bounded", "yes" if fb.bounded and hb.bounded else "no", f=fb.kind, h=hb.kind)
    if fb.bounded and hb.bounded:
        # h - lambda f is bounded for every lambda
        rep = ctx.attempt(2, FamilyParams(2, G))
        return (2, (), rep) if rep else None
    dep = dependence_mod_bounded(f, h, ctx.schedule, ctx.tol.tau)
    ctx.log("h dependent on f", dep.kind, **{"lambda": dep.lam}, trace=dep.verdict.trace)
    if dep.dependent:
        return _dependent_branch(ctx, dep)
    central = pair_scan([Term("xy", 1, f), Term("yx", -1, f)], ctx.schedule, "central")
    cv = central.verdict(ctx.tol.tau)
    ctx.log("central defect", cv.kind, sup=central.sup)
    if not cv.bounded:
        raise _Stop("central defect")
    return _independent_branch(ctx)


def _dependent_branch(ctx: _Ctx, dep):
    f, g, h, G, R = ctx.f, ctx.g, ctx.h, ctx.group, ctx.radius
    fb = boundedness(f, ctx.schedule, ctx.tol.tau)
    ctx.log("f bounded", fb.kind, trace=fb.trace)
    if fb.bounded:
        rep = ctx.attempt(2, FamilyParams(2, G))
        return (2, (), rep) if rep else None
    lam = dep.lam
    phi = dep.residual
    phi_hat = _lin(G, [(1, g), (_coef(lambda l: l * l / 2, lam), f), (lam, phi)])

    # bounded multiplicative phi-hat: f = a m + phi
    pv = boundedness(phi_hat, ctx.schedule, ctx.tol.tau)
    ctx.log("phi-hat bounded", pv.kind, trace=pv.trace)
    if pv.bounded:
        md = multiplicativity_defect(phi_hat, ctx.schedule)
        ctx.log("phi-hat multiplicative", "yes" if md.sup <= ctx.tol.mult else "no", defect=md.sup)
        if md.sup <= ctx.tol.mult:
            m = fit_character(phi_hat, R, ctx.tol.fit)
            if m is not None and not isinstance(m, Zero):
                try:
                    a = _additive_fit(twist_by_character(f, GFunction(G, m)), ctx.schedule)
                except LabError as exc:
                    ctx.log("additive part of f/m", "error", message=str(exc))
                else:
                    rep = ctx.attempt(3, FamilyParams(3, G, lam=lam, a=a, m=m))
                    if rep:
                        return 3, (), rep

    # unbounded multiplicative M with f = alpha (M - b)
    M = _try(ctx, "exponential fit of f", fit_exponential, f, R)
    if M is not None:
        alpha = _fit_scalar(f, GFunction(G, M), R)
        ctx.log("case 4 fit", "candidate", alpha=alpha, mu=[complex_to_json(c) for c in M.mu])
        if alpha != 0:
            rep = ctx.attempt(4, FamilyParams(4, G, alpha=alpha, lam=lam, M=M))
            if rep:
                refined = _case7_from_case4(ctx, M)
                if refined is not None:
                    return 7, (4,), refined
                return 4, (), rep

    # sine pair (f, phi-hat)
    pair = SineCosinePair(f, phi_hat, "sine")
    rep = ctx.attempt(5, FamilyParams(5, G, lam=lam, f0g0=pair))
    if rep:
        return 5, (), rep
    return None


def _case7_from_case4(ctx: _Ctx, M):
    """Degenerate case 7 (beta = 0, a = 0): g bounded multiplicative, h = lambda (M - g)."""
    f, g, h, G, R = ctx.f, ctx.g, ctx.h, ctx.group, ctx.radius
    gv = boundedness(g, ctx.schedule, ctx.tol.tau)
    if not gv.bounded:
        return None
    m = fit_character(g, R, ctx.tol.fit)
    if m is None:
        return None
    col = _lin(G, [(1, GFunction(G, M)), (-1, GFunction(G, m))])
    lam = _fit_scalar(h, col, R)
    if lam == 0:
        return None
    zero_a = Additive([0] * G.dim)
    return ctx.attempt(7, FamilyParams(7, G, lam=lam, beta=0j, M=M, m=m, a=zero_a))


def _try(ctx, what, fn, *args):
    try:
        return fn(*args)
    except LabError as exc:
        ctx.log(what, "error", message=f"{type(exc).__name__}: {exc}")
        return None


def _independent_branch(ctx: _Ctx):
    f, g, h, G, R = ctx.f, ctx.g, ctx.h, ctx.group, ctx.radius
    td = triple_dependence(g, f, h, ctx.schedule, ctx.tol.tau)
    ctx.log("g dependent on f, h", td.kind, alpha=td.alpha, beta=td.beta, trace=td.verdict.trace)
    if not td.dependent:
        return None  # only exact solutions remain; classify() checks case 10
    alpha, beta = td.alpha, td.beta
    disc = _coef(lambda a, b: b * b - 2 * a, alpha, beta)
    ctx.log("2 alpha - beta^2", "nonzero" if abs(disc) > ctx.tol.disc else "zero", value=hiprec.to_complex(disc))
    if abs(disc) > ctx.tol.disc:
        return _cosine_branch(ctx, alpha, beta, disc)
    return _quadratic_branch(ctx, beta)


def _cosine_branch(ctx: _Ctx, alpha, beta, disc):
    f, g, h, G = ctx.f, ctx.g, ctx.h, ctx.group
    lam = _canonical_sign(hiprec.snap(_coef(lambda d: gmpy2.sqrt(1 / d), disc)))
    rho = hiprec.snap(_coef(lambda b, l: b * l, beta, lam))
    b = _lin(G, [(1, g), (-_hp(alpha), f), (-_hp(beta), h)])
    inv2 = _coef(lambda l: 1 / (l * l), lam)
    f0 = _lin(G, [(-inv2, f), (1, b)])
    g0 = _lin(G, [(_coef(lambda l: 1 / l, lam), h), (_coef(lambda r, l: r / (l * l), rho, lam), f)])
    ctx.log("cosine reduction", "candidate", **{"lambda": lam, "rho": rho})
    params = FamilyParams(6, G, lam=lam, rho=rho, alpha=alpha, beta=beta, f0g0=SineCosinePair(f0, g0, "cosine"))
    rep = ctx.attempt(6, params)
    return (6, (), rep) if rep else None


def _canonical_sign(z: complex) -> complex:
    """The triple is invariant under (lambda, rho) -> (-lambda, -rho); pick Re > 0, or Im > 0 on the axis."""
    if z.real < 0 or (z.real == 0 and z.imag < 0):
        z = -z
    return complex(z.real + 0.0, z.imag + 0.0)


def _quadratic_branch(ctx: _Ctx, beta):
    f, g, h, G, R = ctx.f, ctx.g, ctx.h, ctx.group, ctx.radius
    alpha = _coef(lambda b: b * b / 2, beta)
    rho = _lin(G, [(1, g), (-alpha, f), (-_hp(beta), h)])
    m = fit_character(rho, R, ctx.tol.fit)
    ctx.log("bounded multiplicative m", "found" if m is not None else "none")
    if m is None:
        return None
    H = _lin(G, [(_hp(beta), f), (1, h)])
    if not isinstance(m, Zero):
        try:
            a = _additive_fit(twist_by_character(H, GFunction(G, m)), ctx.schedule)
        except LabError as exc:
            ctx.log("H = a m + b", "no", message=f"{type(exc).__name__}: {exc}")
        else:
            ctx.log("H = a m + b", "yes", a=[complex_to_json(c) for c in a.coeffs])
            mg, ag = GFunction(G, m), GFunction(G, a)
            try:
                a1, b_bound = quadratic_split(f, mg, ag, tol=0.0, schedule=ctx.schedule, strict=False)
                a1 = Additive([hiprec.snap(c) for c in a1.coeffs])
            except LabError as exc:
                ctx.log("quadratic split", "fail", message=f"{type(exc).__name__}: {exc}")
            else:
                ctx.log("quadratic split", "ok", b_bound=b_bound)
                rep = ctx.attempt(8, FamilyParams(8, G, beta=beta, a=a, a1=a1, m=m))
                if rep:
                    return 8, (), rep
            rep = ctx.attempt(9, FamilyParams(9, G, beta=beta, a=a, m=m, free_f=f.desc))
            return (9, (), rep) if rep else None
    # H = lambda (M - m) with M unbounded multiplicative
    M = _try(ctx, "exponential fit of H", fit_exponential, H, R)
    if M is None:
        return None
    col = _lin(G, [(1, GFunction(G, M)), (-1, GFunction(G, m))])
    lam = _fit_scalar(H, col, R)
    ctx.log("H = lambda (M - m)", "candidate", **{"lambda": lam}, mu=[complex_to_json(c) for c in M.mu])
    if lam == 0:
        return None
    rest = _lin(G, [(1, f), (_coef(lambda l: -l * l, lam), GFunction(G, M))])
    if isinstance(m, Zero):
        a = Additive([0] * G.dim)
    else:
        try:
            a = _additive_fit(twist_by_character(rest, GFunction(G, m)), ctx.schedule)
        except LabError as exc:
            ctx.log("additive part of (f - lambda^2 M)/m", "error", message=f"{type(exc).__name__}: {exc}")
            return None
    rep = ctx.attempt(7, FamilyParams(7, G, lam=lam, beta=beta, M=M, m=m, a=a))
    return (7, (), rep) if rep else None


# ---------------------------------------------------------------- factorisation of psi


def psi_matrix(f: GFunction, g: GFunction, h: GFunction, radius: int) -> np.ndarray:
    """psi(x, y) over window(radius) x window(radius), computed exactly as needed, as complex128."""
    sc = _Scanner(cosine_sine_terms(f, g, h), radius)
    idx = np.arange(sc.n)
    if sc.prec is None:
        return np.asarray(sc.block(idx, idx), dtype=np.complex128)
    with hiprec.working(sc.prec):
        return hiprec.to_complex_array(sc.block(idx, idx))


def fit_psi_factorization(psi, f: GFunction, h: GFunction, radius: int):
    """Per-x least squares psi(x, .) ~ phi1(x) f + phi2(x) h over the window.

    ``psi`` is either a callable psi(x, y) on group elements or a precomputed matrix over
    window(radius) x window(radius). Returns (phi1, phi2, max residual), with phi1, phi2
    as Table-like arrays over the window.
    """
    group = f.group
    pts, key = window_points(group, radius)
    n = len(pts)
    if callable(psi):
        from .funcspace.core import element_at

        elems = [element_at(group, pts, i) for i in range(n)]
        P = np.array([[complex(psi(x, y)) for y in elems] for x in elems], dtype=np.complex128)
    else:
        P = np.asarray(psi, dtype=np.complex128)
        if P.shape != (n, n):
            raise MalformedInput(f"psi matrix must be {n} x {n}")
    cols = []
    for F in (f, h):
        v, _ = values_auto(F, pts, key)
        cols.append(hiprec.to_complex_array(v))
    A = np.stack(cols, axis=1)
    scale = np.abs(A).max(axis=0)
    if np.any(scale == 0):
        raise DegenerateGram("a column vanishes on the window")
    An = A / scale
    gram = An.conj().T @ An
    det = (gram[0, 0] * gram[1, 1] - gram[0, 1] * gram[1, 0]).real
    ndet = det / (gram[0, 0].real * gram[1, 1].real)
    if not ndet > 1e-8:
        raise DegenerateGram(f"normalised Gram determinant {ndet:.3g} <= 1e-8")
    coef = np.linalg.solve(gram, (P @ An.conj()).T).T  # rows: (phi1, phi2) scaled
    resid = float(np.abs(P - coef @ An.T).max()) if n else 0.0
    phi = coef / scale
    return phi[:, 0], phi[:, 1], resid
