"""Scalar q-special functions with explicit truncation bounds.

Conventions
-----------
Functions with a base above one (``q > 1``) are evaluated through infinite
products in the base ``1/q``.  All products run through :func:`pochhammer_inf`,
which reports the size of the neglected tail in a :class:`TailBound`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import ConfigError, DivergenceError, NonDecayError, PoleError

_EPS = 2.220446049250313e-16

# Lanczos approximation, g = 7, nine coefficients.
_LANCZOS_G = 7
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


@dataclass(frozen=True)
class QParam:
    """A validated base together with the side of 1 it lives on."""

    q: float
    branch: str

    def __post_init__(self) -> None:
        if self.branch == "above":
            if not self.q > 1 + 1e-12:
                raise ConfigError(f"base-above-one requires q > 1, got {self.q}")
        elif self.branch == "below":
            if not 1e-12 < self.q < 1 - 1e-12:
                raise ConfigError(f"base-below-one requires 0 < q < 1, got {self.q}")
        else:
            raise ConfigError(f"unknown branch {self.branch!r}")

    @classmethod
    def above(cls, q: float) -> "QParam":
        return cls(float(q), "above")

    @classmethod
    def below(cls, q: float) -> "QParam":
        return cls(float(q), "below")


@dataclass(frozen=True)
class TailBound:
    requested: float
    achieved: float
    terms: int


def _base(q, branch: str) -> float:
    if isinstance(q, QParam):
        if q.branch != branch:
            raise ConfigError(f"expected base {branch} one, got {q.branch}")
        return q.q
    return QParam(float(q), branch).q


def pochhammer_inf(z, q, tol: float = 1e-15, max_terms: int = 10**7):
    """Return ``((z; q)_inf, TailBound)`` for ``0 < |q| < 1``.

    The product is cut once ``expm1(tail) * max(1, |partial|)`` drops below
    ``tol``, where ``tail`` bounds the logarithm of the neglected factors, so
    ``tol`` caps both the absolute and the relative truncation error.  A factor
    that is exactly zero gives an exact zero; a factor that is merely tiny
    raises :class:`DivergenceError`.
    """
    if isinstance(q, QParam):
        q = q.q
    aq = abs(q)
    if not 0 < aq < 1:
        raise ConfigError(f"pochhammer_inf needs 0 < |q| < 1, got {q}")
    prod = 1.0
    qr = 1.0
    for r in range(max_terms):
        w = qr * z
        f = 1 - w
        if f == 0:
            return 0.0, TailBound(tol, 0.0, r + 1)
        if abs(f) < 64 * _EPS * max(1.0, abs(w)):
            raise DivergenceError(
                f"factor 1 - q^{r} z = {f!r} is within rounding of zero but not exactly zero"
            )
        prod *= f
        qr *= q
        t = abs(qr * z)
        if t < 0.5:
            log_tail = t / ((1 - aq) * (1 - t))
            rel_tail = math.expm1(log_tail) if log_tail < 1 else math.inf
            if rel_tail * max(1.0, abs(prod)) <= tol:
                return prod, TailBound(tol, abs(prod) * rel_tail, r + 1)
    raise NonDecayError(f"pochhammer_inf did not converge in {max_terms} factors")


def _poch(z, q, tol: float = 1e-15) -> float:
    return pochhammer_inf(z, q, tol)[0]


def pochhammer_ratio(z1, z2, q, tol: float = 1e-15, max_terms: int = 10**7):
    """``(z1; q)_inf / (z2; q)_inf`` as a product of factor ratios.

    Stays finite when both products underflow (``q`` close to 1).  ``tol``
    bounds the relative error of the result.
    """
    if isinstance(q, QParam):
        q = q.q
    aq = abs(q)
    if not 0 < aq < 1:
        raise ConfigError(f"pochhammer_ratio needs 0 < |q| < 1, got {q}")
    gap = abs(z1 - z2)
    prod = 1.0
    qr = 1.0
    for r in range(max_terms):
        w1, w2 = qr * z1, qr * z2
        f1, f2 = 1 - w1, 1 - w2
        if f1 == 0:
            return 0.0 * prod
        if f2 == 0:
            raise PoleError(f"denominator factor r = {r} vanishes")
        for f, w in ((f1, w1), (f2, w2)):
            if abs(f) < 64 * _EPS * max(1.0, abs(w)):
                raise DivergenceError(f"factor {f!r} is within rounding of zero but not exactly zero")
        prod *= f1 / f2
        qr *= q
        m = max(abs(qr * z1), abs(qr * z2))
        if m < 0.5:
            log_tail = abs(qr) * gap / ((1 - aq) * (1 - m))
            if log_tail < 1 and math.expm1(log_tail) <= tol:
                return prod
    raise NonDecayError(f"pochhammer_ratio did not converge in {max_terms} factors")


def _nonpositive_integer(t) -> bool:
    return isinstance(t, (int, float)) and float(t) <= 0 and float(t) == math.floor(t)


def gamma_q(t: float, q, tol: float = 1e-15) -> float:
    """``(1/q; 1/q)_inf / (q^-t; 1/q)_inf`` for ``q > 1``.

    Satisfies ``gamma_q(t + 1) = (1 - q^-t) gamma_q(t)`` and ``gamma_q(1) = 1``.
    """
    qq = _base(q, "above")
    if _nonpositive_integer(t):
        raise PoleError(f"gamma_q has a pole at t = {t}")
    b = 1.0 / qq
    return pochhammer_ratio(b, qq ** (-t), b, tol)


def gamma_qinv(t: float, q, tol: float = 1e-15) -> float:
    """The q-gamma function in base ``1/q``: ``(1 - 1/q)^(1 - t) gamma_q(t)``."""
    qq = _base(q, "above")
    return (1 - 1 / qq) ** (1 - t) * gamma_q(t, qq, tol)


def classical_gamma(t: float) -> float:
    """Euler's gamma function on the real line (Lanczos, reflection below 1/2)."""
    if _nonpositive_integer(t):
        raise PoleError(f"Gamma has a pole at t = {t}")
    if t < 0.5:
        return math.pi / (math.sin(math.pi * t) * classical_gamma(1 - t))
    x = t - 1
    acc = _LANCZOS[0]
    for i in range(1, _LANCZOS_G + 2):
        acc += _LANCZOS[i] / (x + i)
    s = x + _LANCZOS_G + 0.5
    return math.sqrt(2 * math.pi) * s ** (x + 0.5) * math.exp(-s) * acc


def _spiral_exponent(x: float, q: float) -> int | None:
    """Return ``d`` if ``x`` equals ``q**d`` up to a few ulps, else ``None``."""
    if x <= 0:
        return None
    d = round(math.log(x) / math.log(q))
    target = q ** d
    if abs(x - target) <= 8 * _EPS * target:
        return d
    return None


def q_exp_E(x: float, q, tol: float = 1e-15) -> float:
    """``E_{1/q}(x / (1 - q)) = prod_{l >= 1} (1 - x q^-l)`` for ``q > 1``.

    Points of the spiral ``x = q^d`` with ``d >= 1`` give exactly zero.
    """
    qq = _base(q, "above")
    d = _spiral_exponent(x, qq)
    if d is not None:
        return q_exp_E_lattice(d, qq, tol)
    return _poch(x / qq, 1.0 / qq, tol)


def q_exp_E_lattice(d: int, q: float, tol: float = 1e-15) -> float:
    """The same factor at the lattice point ``x = q**d`` with integer ``d``."""
    if d >= 1:
        return 0.0
    return _poch(q ** (d - 1), 1.0 / q, tol)


def e_q(x: float, q, tol: float = 1e-15) -> float:
    """Small q-exponential ``1 / ((1 - q) x; q)_inf`` for ``0 < q < 1``."""
    qq = _base(q, "below")
    return 1.0 / _poch((1 - qq) * x, qq, tol)


def E_q(x: float, q, tol: float = 1e-15) -> float:
    """Big q-exponential ``((q - 1) x; q)_inf`` for ``0 < q < 1``."""
    qq = _base(q, "below")
    return _poch((qq - 1) * x, qq, tol)


def theta(x: float, q, tol: float = 1e-16) -> float:
    """Jacobi theta ``sum_n q^(-n(n-1)/2) x^n`` for ``q > 1`` and ``x > 0``."""
    qq = _base(q, "above")
    s0, _, scale = _theta_pair(x, qq, tol)
    return s0 * math.exp(scale)


def _theta_pair(x: float, q: float, tol: float):
    if not x > 0:
        raise ConfigError("theta is evaluated on the positive real line only")
    if q < 1 + 1e-6:
        raise ConfigError(f"theta/q_log are unreliable for q < 1 + 1e-6 (got q = {q})")
    L = math.log(q)
    lx = math.log(x)
    centre = round(lx / L + 0.5)

    def logterm(n: int) -> float:
        return -n * (n - 1) / 2 * L + n * lx

    scale = logterm(centre)
    cutoff = math.log(tol) - 5
    s0 = s1 = 0.0
    terms = []
    n = centre
    while True:
        lt = logterm(n) - scale
        if lt < cutoff and n > centre:
            break
        terms.append((n, lt))
        n += 1
    n = centre - 1
    while True:
        lt = logterm(n) - scale
        if lt < cutoff:
            break
        terms.append((n, lt))
        n -= 1
    # add smallest terms first for a deterministic, accurate sum
    terms.sort(key=lambda t: t[1])
    for n, lt in terms:
        w = math.exp(lt)
        s0 += w
        s1 += n * w
    return s0, s1, scale


def q_log(x: float, q, tol: float = 1e-16) -> float:
    """The q-logarithm ``1/2 - x theta'(x) / theta(x)``.

    ``q_log(1) == 0``, ``q_log(q**-m * x) == q_log(x) + m`` and on the spiral
    ``q_log(q**b) == -b``.
    """
    qq = _base(q, "above")
    s0, s1, _ = _theta_pair(x, qq, tol)
    return 0.5 - s1 / s0


def jackson(f: Callable[[float], float], q, p: float, tol: float = 1e-14,
            max_terms: int = 10**4) -> float:
    """Jackson integral ``sum_{d in Z} q^(d p) f(q^d)``.

    Each direction stops after 8 consecutive terms below
    ``tol * (|partial sum| + 1)``; more than ``max_terms`` terms on one side
    raises :class:`NonDecayError`.
    """
    qq = float(q.q if isinstance(q, QParam) else q)
    if qq <= 0 or qq == 1:
        raise ConfigError("jackson needs q > 0, q != 1")
    total = f(1.0)
    for step in (1, -1):
        small = 0
        d = 0
        while small < 8:
            d += step
            if abs(d) > max_terms:
                raise NonDecayError(f"Jackson sum shows no decay after {max_terms} terms (direction {step:+d})")
            try:
                x = qq ** d
                fv = f(x)
                term = 0.0 if fv == 0 else fv * qq ** (d * p)
            except OverflowError as exc:
                raise NonDecayError("Jackson sum overflowed before decaying") from exc
            total += term
            if abs(term) < tol * (abs(total) + 1):
                small += 1
            else:
                small = 0
    return total


def gamma_q_c(z: float, q, tol: float = 1e-15) -> float:
    """Continuous q-gamma ``pi / sin(pi z) * (q^(1-z); q)_inf / (q; q)_inf`` for ``0 < q < 1``.

    Equals ``int_0^inf x^z / (-x; q)_inf dx / x`` for ``z > 0``.
    """
    qq = _base(q, "below")
    if float(z) == math.floor(z):
        raise PoleError(f"gamma_q_c has a pole at integer z = {z}")
    return math.pi / math.sin(math.pi * z) * pochhammer_ratio(qq ** (1 - z), qq, qq, tol)


def ramanujan_closed_form(z: float, a: float, q, tol: float = 1e-15) -> float:
    """Closed form of ``int_0^inf t^z (-a t; q)_inf / (-t; q)_inf dt / t``.

    ``(a; q)(q^(1-z); q) / ((q; q)(a q^(-z); q)) * pi / sin(pi z)``, valid where
    the integral converges (``0 < z`` and ``a q^-z < 1`` for ``0 <= a < 1``).
    At ``a = 0`` this is :func:`gamma_q_c`.
    """
    qq = _base(q, "below")
    if float(z) == math.floor(z):
        raise PoleError(f"pole at integer z = {z}")
    ratio = pochhammer_ratio(a, qq, qq, tol) * pochhammer_ratio(qq ** (1 - z), a * qq ** (-z), qq, tol)
    return ratio * math.pi / math.sin(math.pi * z)
