"""One test per acceptance criterion; each prints a single PASS/FAIL line."""

import math
import subprocess
import sys
import time
from dataclasses import replace

import pytest

from cosine_sine_lab import jsonio
from cosine_sine_lab.classifier import classify, fit_psi_factorization, psi_matrix
from cosine_sine_lab.deviation import cosine_deviation, multiplicativity_defect, sine_deviation, sup_deviation
from cosine_sine_lab.families import DRAW_CASES, FamilyParams, construct_case, cosine_solution, draw_params, sine_solution
from cosine_sine_lab.funcspace import Additive, Character, Const, ExpChar, GFunction, Prod, Scale, Sum, Zero
from cosine_sine_lab.funcspace.core import DEFAULT_SCHEDULE, sup_norm, combine
from cosine_sine_lab.funcspace.descriptors import desc_to_json
from cosine_sine_lab.group_core import named_group
from cosine_sine_lab.hyers import additive_part
from cosine_sine_lab.oracle import (
    PARAM_TOL,
    enumerate_multiplicative,
    exhaustive_deviation,
    matches,
    param_error,
    random_table_triple,
)

from conftest import LN2, Z, fn, sin7

SEEDS = range(1, 51)
W64 = (16, 32, 64)


def verdict(n, ok, detail):
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, detail


def zero_slots(p):
    slots = {k: Zero() for k in ("b", "phi") if getattr(p, k) is not None}
    return replace(p, **slots)


# ---------------------------------------------------------------- 1


def test_criterion_1_exact_families():
    worst, slowest = 0.0, 0.0
    for case_id in (3, 4, 5, 6, 8):
        for seed in (1, 2, 3):
            t0 = time.perf_counter()
            c = construct_case(zero_slots(draw_params(case_id, seed)))
            worst = max(worst, sup_deviation(*c.triple, schedule=W64).sup)
            slowest = max(slowest, time.perf_counter() - t0)
    two_x = ExpChar([LN2])
    p = FamilyParams(7, lam=1, beta=0, M=two_x, m=Const(1), a=Additive([0]), b=Zero())
    t0 = time.perf_counter()
    c = construct_case(p)
    s7 = sup_deviation(*c.triple, schedule=W64).sup
    slowest = max(slowest, time.perf_counter() - t0)
    ok = worst <= 1e-9 and abs(s7 - 1) <= 1e-12 and slowest < 5
    verdict(1, ok, f"max exact sup {worst:.2e}, case-7 sup {s7!r}, slowest run {slowest:.2f}s")


# ---------------------------------------------------------------- 2


def robustness_excess(case_id, eps, with_baseline):
    """Largest sup_deviation minus its allowed bound over the 50 seeded draws."""
    worst = -math.inf
    for seed in SEEDS:
        c = construct_case(draw_params(case_id, seed, eps))
        bound = c.lipschitz * eps + 1e-9 + (c.baseline if with_baseline else 0.0)
        worst = max(worst, sup_deviation(*c.triple, schedule=W64).sup - bound)
    return worst


def test_criterion_2_converse_robustness():
    excess = {(k, eps): robustness_excess(k, eps, False) for k in DRAW_CASES if k != 7 for eps in (0.01, 0.1)}
    bad = {k: v for k, v in excess.items() if v > 0}
    verdict(2, not bad, f"cases 1-6, 8, 10; largest excess over bound {max(excess.values()):.3g}; violations {sorted(bad)}")


@pytest.mark.xfail(strict=True, reason="case 7 carries a fixed offset of |lambda|^2 |m|^2 that no multiple of eps can absorb")
def test_criterion_2_case7_literal_bound():
    assert max(robustness_excess(7, eps, False) for eps in (0.01, 0.1)) <= 0


def test_criterion_2_case7_with_baseline():
    worst = max(robustness_excess(7, eps, True) for eps in (0.01, 0.1))
    print(f"case 7 with baseline offset: largest excess {worst:.3g}")
    assert worst <= 0


# ---------------------------------------------------------------- 3


def test_criterion_3_hyers_projector():
    F = fn(Sum((Additive([math.pi]), sin7(0.3))))
    t0 = time.perf_counter()
    res = additive_part(F)
    elapsed = time.perf_counter() - t0
    resid = sup_norm(combine(Z, [(1, F), (-1, fn(res.additive))]), 32)[0]
    err = abs(res.coeffs[0] - math.pi)
    ok = err <= 1e-6 and res.iterations <= 40 and resid <= 0.9 + 1e-6 and res.residual_bound <= 0.9 + 1e-6 and elapsed < 1
    verdict(3, ok, f"coefficient error {err:.2e}, {res.iterations} iterations, residual {resid:.4f}, {elapsed:.3f}s")


# ---------------------------------------------------------------- 4 and 7 share the classifications


@pytest.fixture(scope="module")
def roundtrips():
    out = []
    for case_id in DRAW_CASES:
        for seed in SEEDS:
            params = draw_params(case_id, seed, 0.01)
            c = construct_case(params)
            t0 = time.perf_counter()
            report = classify(*c.triple, schedule=DEFAULT_SCHEDULE)
            out.append((case_id, params, report, time.perf_counter() - t0))
    return out


def test_criterion_4_classifier_roundtrip(roundtrips):
    rates, wrong, slowest = {}, [], 0.0
    for case_id, params, report, secs in roundtrips:
        ok = matches(case_id, report) and param_error(params, report.fitted, report.case) <= PARAM_TOL
        rates.setdefault(case_id, []).append(ok)
        if report.classified and not matches(case_id, report):
            wrong.append((case_id, report.case))
        slowest = max(slowest, secs)
    worst_rate = min(sum(v) / len(v) for v in rates.values())
    ok = worst_rate >= 0.9 and not wrong and slowest < 10
    verdict(4, ok, f"lowest per-case pass rate {worst_rate:.0%}, wrong cases {wrong}, slowest {slowest:.2f}s")


# ---------------------------------------------------------------- 5


def test_criterion_5_oracle_equality():
    worst = 0.0
    for name in ("Z6", "D4", "S3"):
        group = named_group(name)
        for seed in range(100):
            f, g, h = random_table_triple(group, seed)
            worst = max(worst, abs(exhaustive_deviation(group, f, g, h) - sup_deviation(f, g, h).sup))
    verdict(5, worst <= 1e-12, f"largest difference {worst:.2e} over 300 triples")


# ---------------------------------------------------------------- 6


def test_criterion_6_finite_group_degeneracy():
    cases, defect, counts = set(), 0.0, {}
    for name in ("Z6", "D4", "S3"):
        group = named_group(name)
        maps = enumerate_multiplicative(group)
        counts[name] = len(maps)
        for t in maps[:-1]:
            defect = max(defect, multiplicativity_defect(GFunction(group, t)).sup)
            defect = max(defect, max(abs(abs(v) - 1) for v in t.values))
            zero = GFunction(group, Zero())
            cases.add(classify(zero, GFunction(group, t), zero).case)
        for seed in range(10):
            cases.add(classify(*random_table_triple(group, seed)).case)
    ok = cases <= {1, 2, 10} and defect <= 1e-12 and counts["Z6"] == 7 and counts["S3"] == 3
    verdict(6, ok, f"cases seen {sorted(cases, key=str)}, map counts {counts}, worst defect {defect:.1e}")


# ---------------------------------------------------------------- 7


def test_criterion_7_lemma_level_checks(roundtrips):
    fact_resid, fact_phi, n_fact = 0.0, 0.0, 0
    for seed in SEEDS:
        p = draw_params(10, seed)
        if p.sub_case not in (6, 8):
            continue  # other sub-cases have h proportional to f, so the Gram matrix is singular
        c = construct_case(p)
        phi1, phi2, resid = fit_psi_factorization(psi_matrix(*c.triple, radius=6), c.f, c.h, 6)
        fact_resid = max(fact_resid, resid)
        fact_phi = max(fact_phi, float(abs(phi1).max()), float(abs(phi2).max()))
        n_fact += 1

    mult, n_mult = 0.0, 0
    for _, _, report, _ in roundtrips:
        m = getattr(report.fitted, "m", None) if report.classified else None
        if m is not None:
            mult = max(mult, multiplicativity_defect(GFunction(Z, m)).sup)
            n_mult += 1

    kern = 0.0
    for m in (Const(1), Character([math.pi]), Character([0.7]), Prod((Character([2.0]), ExpChar([0.01])))):
        s = sine_solution(fn(Additive([1.5 - 0.5j])), fn(m))
        kern = max(kern, sine_deviation(s.f0, s.g0, W64).sup)
    for m1, m2 in ((Character([1.0]), Character([-1.0])), (ExpChar([0.02]), Const(1)), (Character([0.3]), Character([2.2]))):
        s = cosine_solution(fn(m1), fn(m2))
        kern = max(kern, cosine_deviation(s.f0, s.g0, W64).sup)

    ok = n_fact > 0 and fact_resid <= 1e-9 and fact_phi <= 1e-6 and mult <= 1e-9 and kern <= 1e-9
    verdict(
        7,
        ok,
        f"{n_fact} factorisations: residual {fact_resid:.1e}, phi sup {fact_phi:.1e}; "
        f"{n_mult} accepted m: defect {mult:.1e}; solution kernels {kern:.1e}",
    )


# ---------------------------------------------------------------- 8


def test_criterion_8_cli_determinism(tmp_path):
    two_x = ExpChar([LN2])
    fixture = {
        "group": {"kind": "lattice", "dim": 1},
        "functions": {"f": desc_to_json(two_x), "g": desc_to_json(Const(1)), "h": desc_to_json(Sum((two_x, Scale(-1, Const(1)))))},
        "meta": {},
    }
    path = tmp_path / "fixture.json"
    path.write_text(jsonio.dumps(fixture))
    commands = [
        ["classify", "--funcs", str(path)],
        ["deviation", "--funcs", str(path), "--schedule", "16,32,64,128"],
        ["oracle", "finite", "--group", "S3", "--trials", "20"],
    ]
    same = []
    for argv in commands:
        runs = [subprocess.run([sys.executable, "-m", "cosine_sine_lab", *argv], capture_output=True).stdout for _ in range(2)]
        same.append(runs[0] == runs[1] and len(runs[0]) > 0)
    verdict(8, all(same), f"{sum(same)}/{len(same)} subcommands byte-identical across two runs")
