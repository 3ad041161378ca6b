import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cosine_sine_lab.errors import ElementMismatch, MalformedInput, NoIdentity, NonInvertible, NotAssociative, Overflow
from cosine_sine_lab.group_core import (
    INT64_MAX,
    custom,
    cyclic,
    dihedral,
    generators,
    group_from_json,
    group_to_json,
    identity,
    inverse,
    lattice,
    mul,
    mul_array,
    named_group,
    symmetric3,
    window,
    window_array,
    window_size,
)

FINITE = [cyclic(1), cyclic(6), dihedral(4), symmetric3(), dihedral(3)]


def test_lattice_products():
    assert mul(lattice(1), 2, 3) == (5,)
    assert mul(lattice(2), (1, 0), (0, 1)) == (1, 1)
    assert inverse(lattice(1), 3) == (-3,)


def test_cyclic_products():
    z6 = cyclic(6)
    assert mul(z6, 4, 5) == 3
    assert inverse(z6, 2) == 4
    assert z6.order == 6


def test_repeated_row_entry_is_not_invertible():
    table = [[0, 1, 2], [1, 1, 0], [2, 0, 1]]
    with pytest.raises(NonInvertible):
        custom(table)


def test_table_validation_errors():
    with pytest.raises(MalformedInput):
        custom([[0, 1], [1]])
    with pytest.raises(MalformedInput):
        custom([[0, 5], [5, 0]])
    # x * y = -x - y mod 3: a Latin square without identity
    with pytest.raises(NoIdentity):
        custom([[0, 2, 1], [2, 1, 0], [1, 0, 2]])
    # a Latin square with identity that is not associative
    table = [[0, 1, 2, 3, 4], [1, 0, 3, 4, 2], [2, 4, 0, 1, 3], [3, 2, 4, 0, 1], [4, 3, 1, 2, 0]]
    with pytest.raises(NotAssociative):
        custom(table)


def test_symmetric3_structure():
    s3 = symmetric3()
    t = s3.table
    # independent associativity check by triple loop
    assert all(t[t[x][y]][z] == t[x][t[y][z]] for x, y, z in itertools.product(range(6), repeat=3))
    e = s3.identity_index
    self_inverse = [x for x in range(6) if x != e and t[x][x] == e]
    assert len(self_inverse) == 3
    assert any(t[x][y] != t[y][x] for x in range(6) for y in range(6))


def test_dihedral_order_and_noncommutativity():
    d4 = dihedral(4)
    assert d4.order == 8
    assert any(mul(d4, x, y) != mul(d4, y, x) for x in range(8) for y in range(8))


def test_windows():
    assert window(lattice(1), 2) == [(-2,), (-1,), (0,), (1,), (2,)]
    assert len(window(lattice(2), 1)) == 9
    assert window(cyclic(6), 100) == list(range(6))


def test_element_checks():
    with pytest.raises(ElementMismatch):
        mul(lattice(2), (1,), (0, 1))
    with pytest.raises(ElementMismatch):
        mul(cyclic(6), 6, 0)
    with pytest.raises(ElementMismatch):
        mul(lattice(1), 1.5, 0)
    with pytest.raises(Overflow):
        mul(lattice(1), INT64_MAX, 1)
    with pytest.raises(Overflow):
        mul_array(lattice(1), np.array([[INT64_MAX]], dtype=np.int64), np.array([[1]], dtype=np.int64))


def test_named_groups_and_json():
    assert named_group("Z6") == cyclic(6)
    assert named_group("D4") == dihedral(4)
    assert named_group("S3") == symmetric3()
    assert named_group("Z^2") == lattice(2)
    for g in [*FINITE, lattice(1), lattice(3)]:
        assert group_from_json(group_to_json(g)) == g
    with pytest.raises(MalformedInput):
        named_group("Q8")
    with pytest.raises(MalformedInput):
        lattice(5)


def test_generators_span():
    for g in FINITE:
        gens = generators(g)
        span = {g.identity_index}
        frontier = list(span)
        while frontier:
            frontier = [g.table[s][t] for s in frontier for t in gens if g.table[s][t] not in span]
            span.update(frontier)
        assert span == set(range(g.order))


@pytest.mark.parametrize("g", FINITE, ids=lambda g: g.name)
def test_finite_group_axioms_exhaustive(g):
    e = identity(g)
    n = g.order
    for x, y, z in itertools.product(range(n), repeat=3):
        assert mul(g, mul(g, x, y), z) == mul(g, x, mul(g, y, z))
    for x in range(n):
        assert mul(g, x, inverse(g, x)) == e == mul(g, inverse(g, x), x)


coord = st.integers(min_value=-(1 << 40), max_value=1 << 40)


@settings(max_examples=300)
@given(st.integers(1, 4).flatmap(lambda d: st.tuples(*[st.tuples(*[coord] * d)] * 3)))
def test_lattice_associativity(xyz):
    x, y, z = xyz
    g = lattice(len(x))
    assert mul(g, mul(g, x, y), z) == mul(g, x, mul(g, y, z))
    assert mul(g, x, inverse(g, x)) == identity(g) == mul(g, inverse(g, x), x)


@given(st.integers(1, 3), st.integers(0, 12))
def test_window_nesting_and_size(d, r):
    g = lattice(d)
    small = {tuple(p) for p in window_array(g, r).tolist()}
    big = {tuple(p) for p in window_array(g, r + 1).tolist()}
    assert small <= big
    assert len(small) == window_size(g, r) == (2 * r + 1) ** d
