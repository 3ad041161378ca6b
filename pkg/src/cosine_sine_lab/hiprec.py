"""Multiple-precision helpers on top of gmpy2 (MPFR/MPC).

Window scans run in float64 when every intermediate magnitude is small; otherwise they
run on numpy object arrays of ``gmpy2.mpc`` at a precision chosen from a log2 bound of
the largest intermediate term, so that exact cancellations (for example
2^(x+y) - 2^x 2^y) survive.
"""

from __future__ import annotations

import math
from contextlib import contextmanager

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from .errors import Overflow

FLOAT_BITS = 10  # float64 is used when all terms stay below 2**FLOAT_BITS
MARGIN_BITS = 96
MIN_PREC = 128
COEF_PREC = 4096  # precision of derived scalar coefficients (1/alpha, lambda^2/2, ...)
DOUBLE_MAX = 1.7976931348623157e308


@contextmanager
def working(prec: int):
    with gmpy2.context(gmpy2.get_context(), precision=int(prec)):
        yield


def choose_prec(bits: float) -> int | None:
    """None (float64) for small scales, else an MPFR precision covering ``bits`` plus margin."""
    if not math.isfinite(bits) or bits <= FLOAT_BITS:
        return None
    p = int(math.ceil(bits)) + MARGIN_BITS
    return max(MIN_PREC, 32 * ((p + 31) // 32))


def hp(z, prec: int = COEF_PREC):
    """Exact conversion of a Python/complex/gmpy2 number to mpc at ``prec`` bits."""
    if isinstance(z, mpc):
        return z
    with working(prec):
        if isinstance(z, mpfr):
            return mpc(z)
        z = complex(z)
        return mpc(z.real, z.imag)


def to_complex(z) -> complex:
    if isinstance(z, mpc):
        re, im = float(z.real), float(z.imag)
    elif isinstance(z, mpfr):
        re, im = float(z), 0.0
    else:
        z = complex(z)
        re, im = z.real, z.imag
    if math.isinf(re) or math.isinf(im):
        raise Overflow("value exceeds double range")
    return complex(re, im)


def to_float(x) -> float:
    v = float(x)
    if math.isinf(v):
        raise Overflow("value exceeds double range")
    return v


_abs_obj = np.frompyfunc(lambda z: float(abs(z)), 1, 1)
_conj_obj = np.frompyfunc(lambda z: z.conjugate(), 1, 1)
_to_mpc = np.frompyfunc(lambda z: mpc(z.real, z.imag), 1, 1)


def abs_float(values: np.ndarray) -> np.ndarray:
    """|values| as float64 for either complex128 or object (mpc) arrays."""
    if values.dtype != object:
        return np.abs(values)
    out = np.asarray(_abs_obj(values), dtype=np.float64) if values.size else np.zeros(values.shape)
    if np.isinf(out).any():
        raise Overflow("value exceeds double range")
    return out


def conj(values: np.ndarray) -> np.ndarray:
    return _conj_obj(values) if values.dtype == object else np.conj(values)


def to_object(values: np.ndarray) -> np.ndarray:
    """complex128 -> object array of mpc in the current context."""
    if values.dtype == object:
        return values
    out = np.empty(values.shape, dtype=object)
    if values.size:
        out[...] = _to_mpc(values)
    return out


def to_complex_array(values: np.ndarray) -> np.ndarray:
    if values.dtype != object:
        return values.astype(np.complex128)
    out = np.array([to_complex(z) for z in values.ravel()], dtype=np.complex128)
    return out.reshape(values.shape)


def snap(z, bits: int = 30, tol: float = 1e-13) -> complex:
    """Round a high-precision estimate to a double, snapping to the 2^-bits grid when within tol.

    Dyadic parameters then come back exactly, which keeps exponential components
    cancelling in later residuals.
    """
    if isinstance(z, mpc):
        parts = (z.real, z.imag)
    else:
        zc = complex(z)
        parts = (mpfr(zc.real), mpfr(zc.imag))
    out = []
    scale = 1 << bits
    for p in parts:
        with working(max(COEF_PREC, 256)):
            if not gmpy2.is_finite(p):
                raise Overflow("non-finite estimate")
            grid = gmpy2.rint(p * scale) / scale
            close = abs(p - grid) <= tol * max(1.0, abs(float(grid)))
        out.append((float(grid) if close else float(p)) + 0.0)
    return complex(out[0], out[1])


def lstsq(columns, y):
    """Ordinary least squares for one or two complex columns via the normal equations.

    Inputs are equal-length object (mpc) or complex arrays; solved exactly enough in the
    current context. Returns a tuple of mpc coefficients.
    """
    cols = [to_object(np.asarray(c)) for c in columns]
    y = to_object(np.asarray(y))
    conjs = [conj(c) for c in cols]
    gram = [[_dot(conjs[i], cols[j]) for j in range(len(cols))] for i in range(len(cols))]
    rhs = [_dot(conjs[i], y) for i in range(len(cols))]
    zero = mpc(0)
    if len(cols) == 1:
        if gram[0][0] == 0:
            return (zero,)
        return (rhs[0] / gram[0][0],)
    det = gram[0][0] * gram[1][1] - gram[0][1] * gram[1][0]
    if det == 0:
        # fall back to fitting the first nonzero column alone
        if gram[0][0] != 0:
            return (rhs[0] / gram[0][0], zero)
        if gram[1][1] != 0:
            return (zero, rhs[1] / gram[1][1])
        return (zero, zero)
    c0 = (rhs[0] * gram[1][1] - gram[0][1] * rhs[1]) / det
    c1 = (gram[0][0] * rhs[1] - gram[1][0] * rhs[0]) / det
    return (c0, c1)


def _dot(a: np.ndarray, b: np.ndarray):
    acc = mpc(0)
    for u, v in zip(a, b):
        acc += u * v
    return acc
