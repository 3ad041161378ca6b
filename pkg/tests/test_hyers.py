import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from cosine_sine_lab.deviation import cauchy_defect
from cosine_sine_lab.errors import InvalidParams, NotLattice, UnboundedCauchyDefect, ZeroCharacter
from cosine_sine_lab.funcspace import (
    Additive,
    Character,
    Const,
    ExpChar,
    GFunction,
    Noise,
    Pow,
    Prod,
    Scale,
    Sum,
    Table,
    Zero,
    eval_fn,
)
from cosine_sine_lab.funcspace.core import combine, sup_norm
from cosine_sine_lab.group_core import cyclic, lattice
from cosine_sine_lab.hyers import (
    CHECK_RADIUS,
    additive_part,
    inverse_multiplicative,
    quadratic_split,
    twist_by_character,
)

from conftest import LN2, Z, fn, sin7

X = fn(Additive([1]))
ONE = fn(Const(1))


def test_linear_plus_sine():
    res = additive_part(fn(Sum((Scale(3, Additive([1])), sin7(0.5)))))
    assert abs(res.coeffs[0] - 3) <= 1e-6
    assert res.iterations <= 40
    assert res.delta <= 1.5
    assert res.residual_bound <= res.delta + 1e-6


def test_additive_input_is_a_fixed_point():
    res = additive_part(fn(Additive([math.pi])))
    assert res.coeffs == (math.pi,)
    assert res.iterations == 1
    assert res.residual_bound == 0


def test_bounded_input_has_zero_additive_part():
    res = additive_part(fn(Noise(1, 1.0)))
    assert abs(res.coeffs[0]) <= 1e-8
    assert res.residual_bound <= 1


def test_finite_group_is_degenerate():
    res = additive_part(GFunction(cyclic(6), Table([1, 2, 3, 4, 5, 6])))
    assert res.coeffs == () and res.iterations == 0
    assert res.to_json()["coeffs"] == []


def test_unbounded_cauchy_defect_is_rejected():
    with pytest.raises(UnboundedCauchyDefect):
        additive_part(fn(Pow(Additive([1]), 2)))
    with pytest.raises(InvalidParams):
        additive_part(X, depth=41)


def test_two_dimensional_coefficients():
    G = lattice(2)
    F = GFunction(G, Sum((Additive([2, -0.5j]), Noise(5, 0.3))))
    res = additive_part(F)
    assert abs(res.coeffs[0] - 2) <= 1e-6 and abs(res.coeffs[1] + 0.5j) <= 1e-6


def test_linear_plus_character():
    F = fn(Sum((Additive([1.5]), Character([0.25]))))
    assert abs(additive_part(F).coeffs[0] - 1.5) <= 1e-6


def test_twist_examples():
    a, m = X, fn(Character([0.7]))
    t = twist_by_character(a * m, m)
    assert t.desc == a.desc
    assert twist_by_character(X, ONE) is X
    t = twist_by_character(fn(ExpChar([LN2])), fn(Character([math.pi])))
    for x in range(-4, 5):
        assert eval_fn(t, x) == pytest.approx((-2.0) ** x, rel=1e-14, abs=1e-14)


def test_inverse_multiplicative():
    assert inverse_multiplicative(Character([0.5, -1.0])) == Character([-0.5, 1.0])
    assert inverse_multiplicative(ExpChar([1 + 2j])) == ExpChar([-1 - 2j])
    with pytest.raises(ZeroCharacter):
        inverse_multiplicative(Zero())
    with pytest.raises(InvalidParams):
        inverse_multiplicative(Additive([1]))


def test_quadratic_split_examples():
    a1, bound = quadratic_split(fn(Scale(0.5, Pow(Additive([1]), 2))), ONE, X)
    assert a1 == Additive([0]) and bound <= 1e-9
    a1, bound = quadratic_split(fn(Scale(0.5, Sum((Pow(Additive([1]), 2), Additive([1]))))), ONE, X)
    assert a1 == Additive([1]) and bound <= 1e-9
    a1, bound = quadratic_split(fn(Sum((Scale(0.5, Pow(Additive([1]), 2)), Noise(3, 0.1)))), ONE, X)
    assert abs(a1.coeffs[0]) <= 1e-8 and bound <= 0.2
    with pytest.raises(NotLattice):
        quadratic_split(GFunction(cyclic(2), Const(1)), GFunction(cyclic(2), Const(1)), GFunction(cyclic(2), Zero()))


def test_quadratic_split_with_character():
    m = fn(Character([1.1]))
    a = fn(Additive([0.5 - 1j]))
    f = fn(Prod((Scale(0.5, Sum((Pow(a.desc, 2), Additive([2])))), m.desc)))
    a1, bound = quadratic_split(f, m, a)
    assert abs(a1.coeffs[0] - 2) <= 1e-6 and bound <= 1e-6


coef = st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False)
bump = st.tuples(st.integers(0, 1 << 40), st.floats(0, 2))


def bumpy(c, seed, amp):
    F = fn(Sum((Additive([c]), Noise(seed, amp))))
    # the properties are stated for inputs whose Cauchy defect is reported Bounded
    assume(cauchy_defect(F).verdict().bounded)
    return F


@settings(max_examples=25, deadline=None)
@given(coef, bump)
def test_certificate_and_idempotence(c, b):
    F = bumpy(c, *b)
    res = additive_part(F)
    resid = combine(Z, [(1, F), (-1, fn(res.additive))])
    assert sup_norm(resid, CHECK_RADIUS)[0] <= res.delta + 1e-6
    assert res.residual_bound <= res.delta + 1e-6
    again = additive_part(fn(res.additive))
    assert again.coeffs == res.coeffs


@settings(max_examples=20, deadline=None)
@given(coef, coef, bump, bump)
def test_linearity(c1, c2, b1, b2):
    tol = 1e-9
    f1, f2 = bumpy(c1, *b1), bumpy(c2, *b2)
    r1, r2 = additive_part(f1, tol=tol), additive_part(f2, tol=tol)
    f12 = f1 + f2
    assume(cauchy_defect(f12).verdict().bounded)
    r12 = additive_part(f12, tol=tol)
    assert abs(r12.coeffs[0] - r1.coeffs[0] - r2.coeffs[0]) <= 2 * tol + 1e-15 * (abs(c1) + abs(c2))


@settings(max_examples=25, deadline=None)
@given(coef, st.floats(0, 2 * math.pi), st.floats(-0.05, 0.05))
def test_twist_inverts(c, angle, rate):
    a = fn(Additive([c]))
    for m in (fn(Character([angle])), fn(Prod((Character([angle]), ExpChar([rate]))))):
        t = twist_by_character(fn(Prod((a.desc, m.desc))), m)
        assert sup_norm(combine(Z, [(1, t), (-1, a)]), 64)[0] <= 1e-12 * max(1, 64 * abs(c))
