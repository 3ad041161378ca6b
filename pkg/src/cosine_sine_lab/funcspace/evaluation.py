"""Vectorised evaluation of descriptors on point sets, in float64 or MPFR/MPC.

Every evaluation first computes a per-node log2 magnitude bound. The maximum over all
nodes (the "scale") tells how many bits an exact cancellation between subterms can
cost, and drives the precision choice in :mod:`cosine_sine_lab.hiprec`.
"""

from __future__ import annotations

import math
from collections import OrderedDict

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from .. import hiprec
from ..errors import Overflow
from ..group_core import GroupSpec
from ..rng import MASK64, fold_coords_array, splitmix64_array, unit_from_state
from .descriptors import (
    Additive,
    Character,
    Const,
    Desc,
    ExpChar,
    FiniteChar,
    Noise,
    Pow,
    Prod,
    Scale,
    Sum,
    Table,
    Zero,
)

EXP_LIMIT = 700.0  # natural-log magnitude above which ExpChar raises Overflow
_LN2 = math.log(2.0)
_CACHE_SIZE = 512

_value_cache: OrderedDict = OrderedDict()
_bound_cache: OrderedDict = OrderedDict()


def _cache_get(cache, key):
    if key is None:
        return None
    try:
        val = cache[key]
    except KeyError:
        return None
    cache.move_to_end(key)
    return val


def _cache_put(cache, key, val):
    if key is None:
        return
    cache[key] = val
    if len(cache) > _CACHE_SIZE:
        cache.popitem(last=False)


def clear_caches():
    _value_cache.clear()
    _bound_cache.clear()


def noise_values(seed: int, amp: float, group: GroupSpec, pts: np.ndarray) -> np.ndarray:
    """SplitMix64(seed XOR fold(coords)) mapped to amp * [-1, 1)."""
    coords = pts if group.is_lattice else np.asarray(pts, dtype=np.int64)[:, None]
    state = splitmix64_array(np.uint64(int(seed) & MASK64) ^ fold_coords_array(coords))
    return amp * unit_from_state(state)


def _log2abs(values) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log2(np.abs(np.asarray(values, dtype=np.complex128)))


def _scalar_log2(c) -> float:
    if isinstance(c, (mpc, mpfr)):
        a = abs(c)
        return float(gmpy2.log2(a)) if a != 0 else -math.inf
    a = abs(complex(c))
    return math.log2(a) if a else -math.inf


def _amax(arr: np.ndarray) -> float:
    if arr.size == 0:
        return -math.inf
    return float(np.max(arr))


def bounds(desc: Desc, group: GroupSpec, pts: np.ndarray, key=None):
    """Return (log2 bound per point, max log2 bound over all nodes, overflow mask)."""
    ck = None if key is None else (desc, group, key)
    hit = _cache_get(_bound_cache, ck)
    if hit is not None:
        return hit
    out = _bounds(desc, group, pts, key)
    _cache_put(_bound_cache, ck, out)
    return out


def _bounds(d: Desc, group: GroupSpec, pts: np.ndarray, key):
    n = len(pts)
    none = np.zeros(n, dtype=bool)
    if isinstance(d, Zero):
        lb = np.full(n, -np.inf)
        return lb, -math.inf, none
    if isinstance(d, Const):
        lb = np.full(n, _scalar_log2(d.c))
        return lb, _amax(lb), none
    if isinstance(d, Additive):
        weights = np.abs(np.asarray(d.coeffs, dtype=np.complex128))
        with np.errstate(divide="ignore"):
            lb = np.log2(np.abs(pts.astype(np.float64)) @ weights)
        return lb, _amax(lb), none
    if isinstance(d, Character):
        lb = np.zeros(n)
        return lb, _amax(lb), none
    if isinstance(d, ExpChar):
        re = pts.astype(np.float64) @ np.real(np.asarray(d.mu, dtype=np.complex128))
        ovf = re > EXP_LIMIT
        lb = re / _LN2
        return lb, _amax(lb), ovf
    if isinstance(d, (FiniteChar, Table)):
        lb = _log2abs(np.asarray(d.values, dtype=np.complex128)[pts])
        return lb, _amax(lb), none
    if isinstance(d, Noise):
        lb = np.full(n, math.log2(d.amp) if d.amp > 0 else -math.inf)
        return lb, _amax(lb), none
    parts = [bounds(c, group, pts, key) for c in (d.args if isinstance(d, (Sum, Prod)) else (d.inner,))]
    ovf = none.copy()
    scale = -math.inf
    for _, s, o in parts:
        ovf |= o
        scale = max(scale, s)
    if isinstance(d, Sum):
        lb = np.full(n, -np.inf)
        for p, _, _ in parts:
            lb = np.logaddexp2(lb, p)
    elif isinstance(d, Prod):
        lb = np.zeros(n)
        for p, _, _ in parts:
            lb = lb + p
        lb = np.where(np.isnan(lb), -np.inf, lb)
    elif isinstance(d, Scale):
        lb = parts[0][0] + _scalar_log2(d.c)
    elif isinstance(d, Pow):
        lb = parts[0][0] * d.k
    else:
        raise TypeError(f"unknown descriptor {d!r}")
    return lb, max(scale, _amax(lb)), ovf


def check_overflow(desc: Desc, group: GroupSpec, pts: np.ndarray, key=None):
    _, _, ovf = bounds(desc, group, pts, key)
    if ovf.any():
        bad = pts[int(np.argmax(ovf))]
        raise Overflow(f"exponential leaves double range at {bad.tolist() if hasattr(bad, 'tolist') else bad}")


def evaluate(desc: Desc, group: GroupSpec, pts: np.ndarray, prec: int | None, key=None) -> np.ndarray:
    """Values of ``desc`` at ``pts``: complex128 when prec is None, else mpc objects at prec bits."""
    check_overflow(desc, group, pts, key)
    if prec is None:
        return _eval(desc, group, pts, None, key)
    with hiprec.working(prec):
        return _eval(desc, group, pts, prec, key)


def _eval(d: Desc, group: GroupSpec, pts: np.ndarray, prec, key) -> np.ndarray:
    ck = None if key is None else (d, group, key, prec)
    hit = _cache_get(_value_cache, ck)
    if hit is not None:
        return hit
    out = _eval_float(d, group, pts, key) if prec is None else _eval_hp(d, group, pts, prec, key)
    if out.dtype != object:
        out.setflags(write=False)
    _cache_put(_value_cache, ck, out)
    return out


_SPLIT_LIMIT = 1 << 26


def _cis_float(pts: np.ndarray, angles: np.ndarray) -> np.ndarray:
    """exp(i sum_j theta_j x_j) without rounding the phase products.

    Each angle is split as hi + lo with hi carrying 26 bits, so x_j * hi is exact for
    |x_j| < 2^26 and only the tiny x_j * lo term is rounded.
    """
    x = pts.astype(np.float64)
    if x.size == 0 or np.abs(x).max() >= _SPLIT_LIMIT:
        return np.exp(1j * (x @ angles))
    mant, expo = np.frexp(angles)
    hi = np.ldexp(np.round(np.ldexp(mant, 26)), expo - 26)
    lo = angles - hi
    out = np.exp(1j * (x @ lo))
    for j in range(len(angles)):
        if hi[j] != 0:
            out = out * np.exp(1j * (x[:, j] * hi[j]))
    return out


def _eval_float(d: Desc, group: GroupSpec, pts: np.ndarray, key) -> np.ndarray:
    n = len(pts)
    if isinstance(d, Zero):
        return np.zeros(n, dtype=np.complex128)
    if isinstance(d, Const):
        return np.full(n, complex(d.c), dtype=np.complex128)
    if isinstance(d, Additive):
        return pts.astype(np.float64) @ np.asarray(d.coeffs, dtype=np.complex128)
    if isinstance(d, Character):
        return _cis_float(pts, np.asarray(d.angles, dtype=np.float64))
    if isinstance(d, ExpChar):
        return np.exp(pts.astype(np.float64) @ np.asarray(d.mu, dtype=np.complex128))
    if isinstance(d, (FiniteChar, Table)):
        return np.asarray(d.values, dtype=np.complex128)[pts]
    if isinstance(d, Noise):
        return noise_values(d.seed, d.amp, group, pts).astype(np.complex128)
    if isinstance(d, Sum):
        acc = np.zeros(n, dtype=np.complex128)
        for a in d.args:
            acc = acc + _eval(a, group, pts, None, key)
        return acc
    if isinstance(d, Prod):
        acc = np.ones(n, dtype=np.complex128)
        for a in d.args:
            acc = acc * _eval(a, group, pts, None, key)
        return acc
    if isinstance(d, Scale):
        return complex(d.c) * _eval(d.inner, group, pts, None, key)
    if isinstance(d, Pow):
        base = _eval(d.inner, group, pts, None, key)
        acc = base
        for _ in range(d.k - 1):
            acc = acc * base
        return acc
    raise TypeError(f"unknown descriptor {d!r}")


_exp_obj = np.frompyfunc(gmpy2.exp, 1, 1)
_cis_obj = np.frompyfunc(lambda t: gmpy2.exp(mpc(0, t)), 1, 1)


def _full(n: int, value) -> np.ndarray:
    out = np.empty(n, dtype=object)
    out.fill(value)
    return out


def _linear(coeffs, pts_obj: np.ndarray, n: int) -> np.ndarray:
    acc = _full(n, mpc(0))
    for j, c in enumerate(coeffs):
        if c != 0:
            acc = acc + c * pts_obj[:, j]
    return acc


def _eval_hp(d: Desc, group: GroupSpec, pts: np.ndarray, prec: int, key) -> np.ndarray:
    n = len(pts)
    if isinstance(d, Zero):
        return _full(n, mpc(0))
    if isinstance(d, Const):
        return _full(n, mpc(d.c))
    if isinstance(d, Additive):
        return _linear([mpc(c) for c in d.coeffs], pts.astype(object), n)
    if isinstance(d, Character):
        t = _full(n, mpfr(0))
        cols = pts.astype(object)
        for j, a in enumerate(d.angles):
            if a != 0:
                t = t + mpfr(a) * cols[:, j]
        return _cis_obj(t) if n else _full(0, None)
    if isinstance(d, ExpChar):
        z = _linear([mpc(c) for c in d.mu], pts.astype(object), n)
        return _exp_obj(z) if n else _full(0, None)
    if isinstance(d, (FiniteChar, Table)):
        vals = [mpc(v) for v in d.values]
        out = np.empty(n, dtype=object)
        for i, p in enumerate(pts):
            out[i] = vals[int(p)]
        return out
    if isinstance(d, Noise):
        return hiprec.to_object(noise_values(d.seed, d.amp, group, pts).astype(np.complex128))
    if isinstance(d, Sum):
        acc = _full(n, mpc(0))
        for a in d.args:
            acc = acc + _eval(a, group, pts, prec, key)
        return acc
    if isinstance(d, Prod):
        acc = _full(n, mpc(1))
        for a in d.args:
            acc = acc * _eval(a, group, pts, prec, key)
        return acc
    if isinstance(d, Scale):
        return mpc(d.c) * _eval(d.inner, group, pts, prec, key)
    if isinstance(d, Pow):
        base = _eval(d.inner, group, pts, prec, key)
        acc = base
        for _ in range(d.k - 1):
            acc = acc * base
        return acc
    raise TypeError(f"unknown descriptor {d!r}")
