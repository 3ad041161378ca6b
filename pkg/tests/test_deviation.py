import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cosine_sine_lab.deviation import (
    cauchy_defect,
    central_defect,
    cosine_deviation,
    cosine_sine_terms,
    multiplicativity_defect,
    pair_scan,
    psi_point,
    sine_deviation,
    sup_deviation,
)
from cosine_sine_lab.families import cosine_solution, sine_solution
from cosine_sine_lab.funcspace import (
    Additive,
    Character,
    Const,
    ExpChar,
    GFunction,
    Noise,
    Pow,
    Sum,
    Table,
    Zero,
    eval_fn,
)
from cosine_sine_lab.group_core import lattice, symmetric3

from conftest import Z, fn, sin7

ONE = fn(Const(1))
X = fn(Additive([1]))
X2 = fn(Pow(Additive([1]), 2))


def brute_psi_sup(f, g, h, r):
    """Plain double loop over the window with pointwise evaluation."""
    best = 0.0
    for x in range(-r, r + 1):
        for y in range(-r, r + 1):
            v = eval_fn(f, x + y) - eval_fn(f, x) * eval_fn(g, y) - eval_fn(g, x) * eval_fn(f, y) - eval_fn(h, x) * eval_fn(h, y)
            best = max(best, abs(v))
    return best


def test_square_triple_is_exact(square_triple):
    f, g, h = square_triple
    assert sup_deviation(f, g, h).sup <= 1e-9
    assert psi_point(f, g, h, 17, -5) == 0


def test_exp_triple_has_constant_psi(exp_triple):
    f, g, h = exp_triple
    rep = sup_deviation(f, g, h)
    assert rep.sup == 1.0
    assert all(s == 1.0 for _, s in rep.trace)
    assert abs(psi_point(f, g, h, 3, 4) + 1) <= 1e-12
    # terms near 2^690 cancel exactly in high precision
    assert psi_point(f, g, h, 600, 90) == -1


def test_trivial_kernels(zero):
    assert sup_deviation(zero, zero, zero).sup == 0
    assert sup_deviation(ONE, zero, zero).sup == 1


def test_sine_kernel_examples():
    assert sine_deviation(X, ONE).sup == 0
    pair = sine_solution(X, fn(Character([math.pi])))
    assert sine_deviation(pair.f0, pair.g0).sup <= 1e-12
    # kernel -2xy, largest at the corners
    assert sine_deviation(X2, ONE, (4, 8, 16)).trace == ((4, 32.0), (8, 128.0), (16, 512.0))


def test_cosine_kernel_examples(zero):
    p = cosine_solution(fn(Character([1.0])), fn(Character([-1.0])))
    assert cosine_deviation(p.f0, p.g0).sup <= 1e-12
    assert cosine_deviation(ONE, zero).sup == 0
    assert cosine_deviation(zero, ONE).sup == 1


def test_central_defect_examples():
    assert central_defect(fn(Pow(Additive([1]), 3))).sup == 0
    s3 = symmetric3()
    bump = [0.0] * 6
    bump[1] = 1.0  # index 1 is a transposition
    assert central_defect(GFunction(s3, Table(bump))).sup > 0
    assert central_defect(GFunction(s3, Const(2 - 1j))).sup == 0


def test_cauchy_defect_examples():
    assert cauchy_defect(fn(Additive([2.5 - 1j]))).sup == 0
    rep = cauchy_defect(fn(Sum((Additive([1]), sin7(0.3)))))
    assert 0 < rep.sup <= 0.9
    assert cauchy_defect(X2, (4, 8, 16)).trace == ((4, 32.0), (8, 128.0), (16, 512.0))


def test_multiplicativity_defect_examples():
    assert multiplicativity_defect(fn(Character([1.3]))).sup <= 1e-12
    assert multiplicativity_defect(fn(ExpChar([math.log(2)]))).sup <= 1e-9
    rep = multiplicativity_defect(fn(Sum((Const(1), Noise(4, 0.2)))))
    assert 0 < rep.sup <= 0.64 + 0.4 + 1e-9


def test_report_json_shape(exp_triple):
    out = sup_deviation(*exp_triple, schedule=(2, 4, 8)).to_json()
    assert set(out) == {"sup", "argmax", "radius", "trace", "kernel", "subsampled", "stride"}
    assert out["kernel"] == "cosine_sine"
    assert out["trace"] == [[2, 1.0], [4, 1.0], [8, 1.0]]


def test_subsampling_is_flagged(square_triple):
    rep = pair_scan(cosine_sine_terms(*square_triple), (4, 8, 16), cap=100)
    assert rep.subsampled and rep.stride > 1


coef = st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False)
small_desc = st.one_of(
    st.builds(lambda c: Additive([c]), coef),
    st.builds(lambda c: Const(c), coef),
    st.builds(lambda t: Character([t]), st.floats(-4, 4)),
    st.builds(lambda s, a: Noise(s, a), st.integers(0, 1 << 40), st.floats(0, 1)),
    st.builds(lambda c: ExpChar([c]), st.complex_numbers(max_magnitude=0.5, allow_nan=False)),
)


@settings(max_examples=40, deadline=None)
@given(small_desc, small_desc, small_desc)
def test_scan_matches_double_loop(df, dg, dh):
    f, g, h = fn(df), fn(dg), fn(dh)
    rep = sup_deviation(f, g, h, (2, 4, 6))
    assert rep.sup == pytest.approx(brute_psi_sup(f, g, h, 6), rel=1e-12, abs=1e-12)
    x, y = rep.argmax
    assert abs(abs(psi_point(f, g, h, x, y)) - rep.sup) <= 1e-12 * max(1, rep.sup)
    sups = [s for _, s in rep.trace]
    assert sups == sorted(sups)


small_desc_2d = st.one_of(
    st.builds(lambda a, b: Additive([a, b]), coef, coef),
    st.builds(lambda a, b: Character([a, b]), st.floats(-4, 4), st.floats(-4, 4)),
    st.builds(lambda s, a: Noise(s, a), st.integers(0, 1 << 40), st.floats(0, 1)),
)


@settings(max_examples=15, deadline=None)
@given(small_desc_2d, small_desc_2d, small_desc_2d)
def test_two_dimensional_scan(df, dg, dh):
    g2 = lattice(2)
    f, g, h = (GFunction(g2, d) for d in (df, dg, dh))
    rep = sup_deviation(f, g, h, (1, 2, 3))
    box = [(i, j) for i in range(-3, 4) for j in range(-3, 4)]
    best = max(abs(psi_point(f, g, h, x, y)) for x in box for y in box)
    assert rep.sup == pytest.approx(best, rel=1e-12, abs=1e-12)
