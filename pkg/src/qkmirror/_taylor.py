"""Truncated univariate power series stored as coefficient lists.

Coefficients may be ints/Fractions (exact) or floats/complex; no operation
here introduces floats unless its inputs already contain them.
"""
from __future__ import annotations

import math
from fractions import Fraction


def recip(x):
    return Fraction(1) / x if isinstance(x, (int, Fraction)) else 1 / x


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction))


def pad(a: list, n: int) -> list:
    a = list(a[: n + 1])
    return a + [0] * (n + 1 - len(a))


def mul(a: list, b: list, n: int) -> list:
    c = [0] * (n + 1)
    for i, ai in enumerate(a[: n + 1]):
        if ai:
            for j, bj in enumerate(b[: n + 1 - i]):
                if bj:
                    c[i + j] += ai * bj
    return c


def inv(a: list, n: int) -> list:
    a = pad(a, n)
    if a[0] == 0:
        raise ZeroDivisionError("series with zero constant term is not invertible")
    r0 = recip(a[0])
    b = [r0] + [0] * n
    for k in range(1, n + 1):
        s = 0
        for j in range(1, k + 1):
            if a[j]:
                s += a[j] * b[k - j]
        b[k] = -r0 * s
    return b


def exp(a: list, n: int, const=None) -> list:
    """exp of a series; ``const`` overrides exp(a[0]) (e.g. to keep it exact)."""
    a = pad(a, n)
    if const is None:
        const = 1 if a[0] == 0 else _exp_scalar(a[0])
    b = [const] + [0] * n
    for k in range(1, n + 1):
        s = 0
        for j in range(1, k + 1):
            if a[j]:
                s += j * a[j] * b[k - j]
        b[k] = s * recip(k) if is_exact(s) else s / k
    return b


def _exp_scalar(x):
    import cmath

    return cmath.exp(x) if isinstance(x, complex) else math.exp(x)


def log(a: list, n: int, const=None) -> list:
    """log of a series with nonzero constant term; ``const`` overrides log(a[0])."""
    a = pad(a, n)
    if const is None:
        const = 0 if a[0] == 1 else math.log(a[0])
    r0 = recip(a[0])
    b = [const] + [0] * n
    for k in range(1, n + 1):
        s = k * a[k]
        for j in range(1, k):
            if b[j] and a[k - j]:
                s -= j * b[j] * a[k - j]
        b[k] = s * r0 * (recip(k) if is_exact(s) else 1.0 / k)
    return b


def power(a: list, s: int, n: int) -> list:
    """Integer power, negative exponents via inversion."""
    base = a if s >= 0 else inv(a, n)
    out = [1] + [0] * n
    for _ in range(abs(s)):
        out = mul(out, base, n)
    return out


def scale_arg(a: list, c) -> list:
    """Coefficients of f(c t) from those of f(t)."""
    out = []
    cm = 1
    for ai in a:
        out.append(ai * cm)
        cm = cm * c
    return out


def todd(n: int) -> list:
    """Exact coefficients of t / (1 - e^-t)."""
    # (1 - e^-t)/t = sum (-1)^m t^m / (m+1)!
    base = [Fraction((-1) ** m, math.factorial(m + 1)) for m in range(n + 1)]
    return inv(base, n)


def exp_linear(c, n: int) -> list:
    """Coefficients of e^(c t)."""
    out = []
    term = 1
    for m in range(n + 1):
        out.append(term)
        term = term * c * (recip(m + 1) if is_exact(c) else 1.0 / (m + 1))
    return out
