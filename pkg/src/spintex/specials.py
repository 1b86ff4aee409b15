"""Special functions used by the exchange-field analytics.

Self-contained double-precision implementations of the Dawson integral, the
imaginary error function, and Kummer's confluent hypergeometric function
1F1(a; b; x).  All three are validated against high-precision reference
tables in the test suite.  The implementations favour cancellation-free
series: Dawson is computed from the all-positive-term Kummer form
D(x) = x e^{-x^2} 1F1(1/2; 3/2; x^2) below |x| = 8 and from the asymptotic
expansion above, so no branch loses relative accuracy.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["dawson", "erfi", "hyp1f1"]

_SQRT_PI = math.sqrt(math.pi)


def _dawson_scalar(x: float) -> float:
    ax = abs(x)
    if ax < 1e-8:
        # D(x) = x - 2x^3/3 + O(x^5)
        return x * (1.0 - 2.0 * x * x / 3.0)
    if ax < 8.0:
        # x e^{-x^2} 1F1(1/2; 3/2; x^2): every term positive, no cancellation
        z = x * x
        term = 1.0
        total = 1.0
        k = 0
        while True:
            k += 1
            term *= z / k * (2 * k - 1) / (2 * k + 1)
            total += term
            if term < 1e-17 * total:
                break
        return x * math.exp(-z) * total
    # asymptotic: D(x) = 1/(2x) sum_k (2k-1)!! / (2 x^2)^k, truncated at the
    # first negligible term (converges to machine precision for |x| >= 8)
    inv2z = 1.0 / (2.0 * x * x)
    term = 1.0
    total = 1.0
    for k in range(1, 40):
        term *= (2 * k - 1) * inv2z
        total += term
        if term < 1e-17 * total:
            break
    return total / (2.0 * x)


def dawson(x):
    """Dawson integral D(x) = e^{-x^2} int_0^x e^{t^2} dt (odd, entire)."""
    if np.isscalar(x) or np.ndim(x) == 0:
        return _dawson_scalar(float(x))
    arr = np.asarray(x, dtype=float)
    out = np.empty_like(arr)
    flat = arr.ravel()
    res = out.ravel()
    for i, v in enumerate(flat):
        res[i] = _dawson_scalar(v)
    return out


def erfi(x):
    """Imaginary error function erfi(x) = (2/sqrt(pi)) e^{x^2} D(x).

    Overflows (returns inf) for |x| beyond about 26.6, like e^{x^2} itself.
    """
    if np.isscalar(x) or np.ndim(x) == 0:
        x = float(x)
        if x * x > 709.0:
            return math.copysign(math.inf, x)
        return (2.0 / _SQRT_PI) * math.exp(x * x) * _dawson_scalar(x)
    arr = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        return (2.0 / _SQRT_PI) * np.exp(arr * arr) * dawson(arr)


def hyp1f1(a: float, b: float, x: float) -> float:
    """Kummer's confluent hypergeometric function 1F1(a; b; x).

    Direct Taylor summation.  For a > 0, b > 0, x >= 0 every term is
    positive, so the sum carries full relative precision; this is the only
    regime the analytics use (a = n + 1/2, b in {1/2, 3/2}, x = q^2).
    Negative x is accepted via the Kummer transformation
    1F1(a; b; x) = e^x 1F1(b-a; b; -x) to keep terms positive when possible.
    """
    if b <= 0.0 and b == math.floor(b):
        raise ValueError(f"1F1 undefined for non-positive integer b = {b}")
    if x < 0.0:
        if b - a > 0.0:
            return math.exp(x) * hyp1f1(b - a, b, -x)
        # fall through to direct (alternating) summation
    if x > 708.0:
        raise OverflowError("1F1 argument too large for double precision")
    term = 1.0
    total = 1.0
    ak = a
    bk = b
    k = 0
    while k < 10_000:
        k += 1
        term *= ak * x / (bk * k)
        total += term
        if abs(term) < 1e-17 * abs(total):
            return total
        ak += 1.0
        bk += 1.0
    raise RuntimeError(f"1F1({a}, {b}, {x}) did not converge")
