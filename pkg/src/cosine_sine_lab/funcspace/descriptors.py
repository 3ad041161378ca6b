"""Descriptor trees for complex-valued functions on a group, and their JSON form."""

from __future__ import annotations

import math
from dataclasses import dataclass

from gmpy2 import mpc, mpfr

from ..errors import MalformedInput


def _cplx(z):
    if isinstance(z, (mpc, mpfr)):
        return z
    if isinstance(z, bool):
        raise MalformedInput("booleans are not numbers")
    return complex(z)


def _cvec(values) -> tuple:
    return tuple(complex(v) for v in values)


def _rvec(values) -> tuple:
    return tuple(float(v) for v in values)


class Desc:
    """Marker base class for descriptor nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Zero(Desc):
    pass


@dataclass(frozen=True)
class Const(Desc):
    c: complex

    def __post_init__(self):
        object.__setattr__(self, "c", _cplx(self.c))


@dataclass(frozen=True)
class Additive(Desc):
    """a(x) = sum_j c_j x_j on Z^d."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _cvec(self.coeffs))


@dataclass(frozen=True)
class Character(Desc):
    """m(x) = exp(i sum_j theta_j x_j), bounded and multiplicative on Z^d."""

    angles: tuple

    def __post_init__(self):
        object.__setattr__(self, "angles", _rvec(self.angles))


@dataclass(frozen=True)
class ExpChar(Desc):
    """M(x) = exp(sum_j mu_j x_j), multiplicative on Z^d."""

    mu: tuple

    def __post_init__(self):
        object.__setattr__(self, "mu", _cvec(self.mu))


@dataclass(frozen=True)
class FiniteChar(Desc):
    """Multiplicative function on a finite group given by its values."""

    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", _cvec(self.values))


@dataclass(frozen=True)
class Noise(Desc):
    """Deterministic pseudo-random real values in [-amp, amp)."""

    seed: int
    amp: float

    def __post_init__(self):
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise MalformedInput("noise seed must be an integer")
        amp = float(self.amp)
        if not (amp >= 0 and math.isfinite(amp)):
            raise MalformedInput("noise amplitude must be a finite nonnegative number")
        object.__setattr__(self, "amp", amp)


@dataclass(frozen=True)
class Table(Desc):
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", _cvec(self.values))


@dataclass(frozen=True)
class Sum(Desc):
    args: tuple

    def __post_init__(self):
        args = tuple(self.args)
        if not all(isinstance(a, Desc) for a in args):
            raise MalformedInput("Sum arguments must be descriptors")
        object.__setattr__(self, "args", args)


@dataclass(frozen=True)
class Prod(Desc):
    args: tuple

    def __post_init__(self):
        args = tuple(self.args)
        if not all(isinstance(a, Desc) for a in args):
            raise MalformedInput("Prod arguments must be descriptors")
        object.__setattr__(self, "args", args)


@dataclass(frozen=True)
class Scale(Desc):
    """c * inner; c may be a high-precision mpc for derived coefficients."""

    c: complex
    inner: Desc

    def __post_init__(self):
        object.__setattr__(self, "c", _cplx(self.c))
        if not isinstance(self.inner, Desc):
            raise MalformedInput("Scale inner must be a descriptor")


@dataclass(frozen=True)
class Pow(Desc):
    inner: Desc
    k: int

    def __post_init__(self):
        if isinstance(self.k, bool) or not isinstance(self.k, int) or self.k < 1:
            raise MalformedInput("Pow exponent must be a positive integer")
        if not isinstance(self.inner, Desc):
            raise MalformedInput("Pow inner must be a descriptor")


LEAVES = (Zero, Const, Additive, Character, ExpChar, FiniteChar, Noise, Table)


def children(d: Desc) -> tuple:
    if isinstance(d, (Sum, Prod)):
        return d.args
    if isinstance(d, (Scale, Pow)):
        return (d.inner,)
    return ()


def walk(d: Desc):
    yield d
    for c in children(d):
        yield from walk(c)


# ---------------------------------------------------------------- JSON


def complex_to_json(z) -> list:
    z = complex(z)
    return [z.real + 0.0, z.imag + 0.0]


def complex_from_json(obj) -> complex:
    if isinstance(obj, bool):
        raise MalformedInput("expected a number or [re, im] pair")
    if isinstance(obj, (int, float)):
        return complex(obj)
    if isinstance(obj, list) and len(obj) == 2 and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
        return complex(obj[0], obj[1])
    raise MalformedInput(f"expected a number or [re, im] pair, got {obj!r}")


def _real_from_json(obj) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise MalformedInput(f"expected a real number, got {obj!r}")
    return float(obj)


def _list(obj, key):
    v = obj.get(key)
    if not isinstance(v, list):
        raise MalformedInput(f"'{key}' must be a list")
    return v


def desc_to_json(d: Desc) -> dict:
    if isinstance(d, Zero):
        return {"op": "zero"}
    if isinstance(d, Const):
        return {"op": "const", "c": complex_to_json(d.c)}
    if isinstance(d, Additive):
        return {"op": "additive", "coeffs": [complex_to_json(c) for c in d.coeffs]}
    if isinstance(d, Character):
        return {"op": "character", "angles": [a + 0.0 for a in d.angles]}
    if isinstance(d, ExpChar):
        return {"op": "expchar", "mu": [complex_to_json(c) for c in d.mu]}
    if isinstance(d, FiniteChar):
        return {"op": "finitechar", "values": [complex_to_json(c) for c in d.values]}
    if isinstance(d, Noise):
        return {"op": "noise", "seed": d.seed, "amp": d.amp}
    if isinstance(d, Table):
        return {"op": "table", "values": [complex_to_json(c) for c in d.values]}
    if isinstance(d, Sum):
        return {"op": "sum", "args": [desc_to_json(a) for a in d.args]}
    if isinstance(d, Prod):
        return {"op": "prod", "args": [desc_to_json(a) for a in d.args]}
    if isinstance(d, Scale):
        return {"op": "scale", "c": complex_to_json(d.c), "arg": desc_to_json(d.inner)}
    if isinstance(d, Pow):
        return {"op": "pow", "k": d.k, "arg": desc_to_json(d.inner)}
    raise MalformedInput(f"not a descriptor: {d!r}")


def desc_from_json(obj) -> Desc:
    if not isinstance(obj, dict) or not isinstance(obj.get("op"), str):
        raise MalformedInput(f"descriptor must be an object with an 'op' field, got {obj!r}")
    op = obj["op"]
    try:
        if op == "zero":
            return Zero()
        if op == "const":
            return Const(complex_from_json(obj.get("c")))
        if op == "additive":
            return Additive([complex_from_json(c) for c in _list(obj, "coeffs")])
        if op == "character":
            return Character([_real_from_json(a) for a in _list(obj, "angles")])
        if op == "expchar":
            return ExpChar([complex_from_json(c) for c in _list(obj, "mu")])
        if op == "finitechar":
            return FiniteChar([complex_from_json(c) for c in _list(obj, "values")])
        if op == "noise":
            seed = obj.get("seed")
            if isinstance(seed, bool) or not isinstance(seed, int):
                raise MalformedInput("noise 'seed' must be an integer")
            return Noise(seed, _real_from_json(obj.get("amp")))
        if op == "table":
            return Table([complex_from_json(c) for c in _list(obj, "values")])
        if op == "sum":
            return Sum([desc_from_json(a) for a in _list(obj, "args")])
        if op == "prod":
            return Prod([desc_from_json(a) for a in _list(obj, "args")])
        if op == "scale":
            return Scale(complex_from_json(obj.get("c")), desc_from_json(obj.get("arg")))
        if op == "pow":
            k = obj.get("k")
            if isinstance(k, bool) or not isinstance(k, int):
                raise MalformedInput("pow 'k' must be an integer")
            return Pow(desc_from_json(obj.get("arg")), k)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, MalformedInput):
            raise
        raise MalformedInput(f"bad '{op}' descriptor: {exc}") from exc
    raise MalformedInput(f"unknown descriptor op {op!r}")
