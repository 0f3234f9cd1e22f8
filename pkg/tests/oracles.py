"""Reference values computed independently of the package (mpmath, plain series, quadrature)."""
from __future__ import annotations

import math
from fractions import Fraction

import mpmath as mp


def bessel_k0_series(x: float, dps: int = 40) -> float:
    """``K_0(x) = -(log(x/2) + gamma) I_0(x) + sum_m H_m (x/2)^(2m) / (m!)^2``."""
    with mp.workdps(dps):
        x = mp.mpf(x)
        y = (x / 2) ** 2
        i0 = mp.mpf(0)
        tail = mp.mpf(0)
        term = mp.mpf(1)
        harmonic = mp.mpf(0)
        m = 0
        while True:
            i0 += term
            tail += harmonic * term
            m += 1
            term = term * y / (m * m)
            harmonic += mp.mpf(1) / m
            if term < mp.mpf(10) ** (-dps) and m > 5:
                break
        return float(-(mp.log(x / 2) + mp.euler) * i0 + tail)


def pochhammer(z: float, q: float) -> float:
    return float(mp.qp(z, q))


def gamma_q_direct(t: float, q: float) -> float:
    """``(1/q; 1/q)_inf / (q^-t; 1/q)_inf`` through mpmath."""
    return float(mp.qp(1 / mp.mpf(q), 1 / mp.mpf(q)) / mp.qp(mp.mpf(q) ** (-t), 1 / mp.mpf(q)))


def e_small_series(y: float, q: float, terms: int = 400) -> float:
    """``sum_n y^n / (q; q)_n``, which equals ``1 / (y; q)_inf`` for ``|y| < 1``."""
    total, coef = 0.0, 1.0
    for n in range(terms):
        total += coef
        coef *= y / (1 - q ** (n + 1))
    return total


def _neg_poch(x, q):
    """``(-x; q)_inf`` for ``x >= 0`` by direct product."""
    out = mp.mpf(1)
    term = mp.mpf(x)
    eps = mp.mpf(10) ** (-mp.mp.dps - 3)
    while term > eps:
        out *= 1 + term
        term *= q
    return out


def _log_line_quad(f, lo: float = -120.0, hi: float = 60.0) -> float:
    pts = [lo] + list(range(-40, 41, 5)) + [hi]
    return float(mp.quad(f, sorted(set(pts))))


def gamma_c_quadrature(z: float, q: float) -> float:
    """``int_0^inf x^z / (-x; q)_inf dx / x`` on log coordinates."""
    with mp.workdps(30):
        return _log_line_quad(lambda t: mp.exp(z * t) / _neg_poch(mp.exp(t), q))


def ramanujan_quadrature(z: float, a: float, q: float) -> float:
    """``int_0^inf t^z (-a t; q)_inf / (-t; q)_inf dt / t``."""
    with mp.workdps(30):
        return _log_line_quad(lambda s: mp.exp(z * s) * _neg_poch(a * mp.exp(s), q) / _neg_poch(mp.exp(s), q))


def p1_oscillatory(Q: float) -> float:
    """``int_0^inf exp(-x - Q/x) dx/x = 2 K_0(2 sqrt Q)``."""
    return 2 * bessel_k0_series(2 * math.sqrt(Q))


def zeta(n: int) -> float:
    return float(mp.zeta(n))


def harmonic(d: int) -> Fraction:
    return sum((Fraction(1, r) for r in range(1, d + 1)), Fraction(0))


def det_fraction(matrix) -> Fraction:
    m = [[Fraction(x) for x in row] for row in matrix]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        pivot = next((r for r in range(c, n) if m[r][c] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            m[c], m[pivot] = m[pivot], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            for k in range(c, n):
                m[r][k] -= f * m[c][k]
    return det


def ramanujan_quadrature_fast(z: float, a: float, q: float) -> float:
    """Double-precision quadrature of the same integral, for randomized sweeps."""
    from scipy import integrate

    def log_ratio(s: float) -> float:
        x = math.exp(s)
        acc = 0.0
        r = 0
        while True:
            w = x * q ** r
            acc += math.log1p(a * w) - math.log1p(w)
            if w < 1e-18:
                break
            r += 1
        return acc

    rate = math.log(a) / math.log(q) - z if a > 0 else math.inf
    lo = math.log(1e-20) / z
    hi = 60.0 if rate == math.inf else min(60.0 + 50.0 / rate, 4000.0)
    f = lambda s: math.exp(z * s + log_ratio(s))
    pts = [p for p in (-20.0, -5.0, 0.0, 5.0, 20.0) if lo < p < hi]
    val, _ = integrate.quad(f, lo, hi, points=pts, epsabs=0.0, epsrel=1e-13, limit=1000)
    return val



def ramanujan_trapezoid(z: float, a: float, q: float, h: float = 0.05) -> float:
    """Trapezoid rule on the log line ``x = exp(s)``.

    The integrand is analytic in a strip of half-width pi around the real
    axis, so the error decays like ``exp(-2 pi^2 / h)``. Requires the decay
    rate ``log a / log q - z`` to be bounded away from zero.
    """
    import numpy as np

    rate = math.log(a) / math.log(q) - z
    lo = math.log(1e-19) / z
    hi = 46.0 / rate + 5.0
    s = np.arange(lo, hi + h, h)
    lq = math.log(q)
    rmax = int((hi + 45) / -lq) + 2
    r = np.arange(rmax) * lq
    la = math.log(a)
    total = 0.0
    for chunk in np.array_split(s, max(1, len(s) * rmax // 2_000_000 + 1)):
        e = chunk[:, None] + r[None, :]
        log_ratio = (np.logaddexp(0.0, la + e) - np.logaddexp(0.0, e)).sum(axis=1)
        total += float(np.exp(z * chunk + log_ratio).sum())
    return h * total


def mp_taylor(f, x0: float, n: int, dps: int = 40) -> list[float]:
    """Taylor coefficients of an mpmath-evaluable function by numerical differentiation."""
    with mp.workdps(dps):
        return [float(c) for c in mp.taylor(f, mp.mpf(x0), n)]


def gamma_q_mp(t, q: float):
    """``(1/q; 1/q)_inf / (q^-t; 1/q)_inf`` as an mpmath expression."""
    b = 1 / mp.mpf(q)
    return mp.qp(b, b) / mp.qp(mp.mpf(q) ** (-t), b)


def jackson_bruteforce(columns, q: float, b, box: int, dps: int = 30) -> float:
    """Sum of ``prod_j E(q^(e_j))`` over all exponent vectors in a box.

    Free coordinates range over ``[-box, box]``; the two dependent ones (or one,
    in rank 1) are solved from the monomial constraints ``sum_j col_j e_j = b``.
    ``E(q^e) = (q^(e-1); 1/q)_inf`` is evaluated with mpmath and vanishes for
    ``e >= 1``.
    """
    import itertools

    r = len(columns[0])
    n = len(columns)
    units = [tuple(int(i == j) for j in range(r)) for i in range(r)]
    dependent = [columns.index(u) for u in units]
    free = [j for j in range(n) if j not in dependent]
    with mp.workdps(dps):
        qq = mp.mpf(q)
        cache = {}

        def factor(e):
            if e >= 1:
                return mp.mpf(0)
            if e not in cache:
                cache[e] = mp.qp(qq ** (e - 1), 1 / qq)
            return cache[e]

        total = mp.mpf(0)
        for vals in itertools.product(range(-box, box + 1), repeat=len(free)):
            e = [0] * n
            for j, v in zip(free, vals):
                e[j] = v
            for i, j in enumerate(dependent):
                e[j] = b[i] - sum(columns[t][i] * e[t] for t in free)
            term = mp.mpf(1)
            for x in e:
                term *= factor(x)
                if term == 0:
                    break
            total += term
        return float(total)


def p2_oscillatory(Q: float) -> float:
    """``int exp(-x - y - Q/(xy)) dx dy / (xy)`` reduced to one dimension."""
    with mp.workdps(30):
        f = lambda x: mp.exp(-x) * 2 * mp.besselk(0, 2 * mp.sqrt(Q / x)) / x
        return float(mp.quad(f, [0, 1, 10, mp.inf]))


def hirzebruch_oscillatory(a: int, Q1: float, Q2: float) -> float:
    """Thimble integral for the model ``N = 2``, twists ``[a]``, reduced to one dimension."""
    with mp.workdps(30):
        f = lambda y: mp.exp(-y - Q2 / y) * 2 * mp.besselk(0, 2 * mp.sqrt(Q1 * y ** a)) / y
        return float(mp.quad(f, [0, 1, 10, mp.inf]))
