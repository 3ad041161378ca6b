import math

import pytest

from cosine_sine_lab.funcspace import Additive, Character, Const, ExpChar, GFunction, Noise, Pow, Scale, Sum, Zero
from cosine_sine_lab.group_core import lattice

Z = lattice(1)
LN2 = math.log(2)


def fn(desc, group=Z):
    return GFunction(group, desc)


def sin7(amp):
    """amp * sin(7x) as a sum of two characters."""
    return Sum((Scale(-0.5j * amp, Character([7.0])), Scale(0.5j * amp, Character([-7.0]))))


@pytest.fixture
def square_triple():
    """(x^2/2, 1, x): an exact solution on Z."""
    return fn(Scale(0.5, Pow(Additive([1]), 2))), fn(Const(1)), fn(Additive([1]))


@pytest.fixture
def exp_triple():
    """(2^x, 1, 2^x - 1): psi is identically -1."""
    M = ExpChar([LN2])
    return fn(M), fn(Const(1)), fn(Sum((M, Const(-1))))


@pytest.fixture
def zero():
    return fn(Zero())


@pytest.fixture
def noise():
    return lambda seed, amp, group=Z: fn(Noise(seed, amp), group)
