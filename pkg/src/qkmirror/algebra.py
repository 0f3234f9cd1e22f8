"""Cohomology rings of the normal-form models and analytic calculus on them.

The ring is ``Q[p1, p2] / (p1^N, p2 * prod_j (p2 - a_j p1))`` with basis
``p1^i p2^j`` (``i < N``, ``j <= k``); the rank-1 mode is ``Q[p] / (p^N)``.
Elements carry either exact rational coefficients or complex floats.

Sign convention: ``ch(P_i) = exp(-p_i)`` and ``ch(U_j(P)) = exp(-alpha_j(p))``.
"""
from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np

from . import _taylor as ts
from .errors import ConfigError, PoleError
from .toric import RankTwoModel

EULER_GAMMA = "0.577215664901532860606512090082"
# zeta(2) .. zeta(16), 30 digits
ZETA = {
    2: "1.64493406684822643647241516665",
    3: "1.20205690315959428539973816151",
    4: "1.08232323371113819151600369654",
    5: "1.03692775514336992633136548646",
    6: "1.01734306198444913971451792979",
    7: "1.00834927738192282683979754985",
    8: "1.00407735619794433937868523851",
    9: "1.00200839282608221441785276923",
    10: "1.00099457512781808533714595890",
    11: "1.00049418860411946455870228253",
    12: "1.00024608655330804829863799805",
    13: "1.00012271334757848914675183653",
    14: "1.00006124813505870482925854511",
    15: "1.00003058823630702049355172851",
    16: "1.00001528225940865187173257149",
}


def monomial_basis(model: RankTwoModel) -> list[tuple[int, ...]]:
    if model.rank == 1:
        return [(i,) for i in range(model.N)]
    mons = [(i, j) for j in range(model.k + 1) for i in range(model.N)]
    return sorted(mons, key=lambda m: (m[0] + m[1], m[1]))


def _elementary(a: Sequence[int]) -> list[int]:
    e = [1] + [0] * len(a)
    for x in a:
        for i in range(len(a), 0, -1):
            e[i] += x * e[i - 1]
    return e


class NilpotentAlgebra:
    """Quotient ring with cached structure constants."""

    def __init__(self, model: RankTwoModel, backend: str = "exact") -> None:
        if backend not in ("exact", "float"):
            raise ConfigError(f"unknown backend {backend!r}")
        self.model = model
        self.backend = backend
        self.exact = backend == "exact"
        self.rank = model.rank
        self.dim = model.dim
        self.basis = monomial_basis(model)
        self.size = len(self.basis)
        self.index = {m: i for i, m in enumerate(self.basis)}
        self.degrees = [sum(m) for m in self.basis]
        self._elem = _elementary(model.a) if model.rank == 2 else [1]
        self._reduced: dict[tuple[int, ...], dict[int, int]] = {}
        rows: list[list[tuple[int, int, int]]] = []
        tensor = np.zeros((self.size, self.size, self.size))
        for u, mu in enumerate(self.basis):
            row = []
            for v, mv in enumerate(self.basis):
                for w, c in self.reduce_monomial(tuple(x + y for x, y in zip(mu, mv))).items():
                    row.append((v, w, c))
                    tensor[u, v, w] = c
            rows.append(row)
        self._rows = rows
        self._tensor = tensor
        self.top = self.index[(model.N - 1, model.k) if model.rank == 2 else (model.N - 1,)]

    # -- reduction ----------------------------------------------------------
    def reduce_monomial(self, exps: tuple[int, ...]) -> dict[int, int]:
        """Normal form of a monomial as ``{basis index: integer coefficient}``."""
        if exps in self._reduced:
            return self._reduced[exps]
        m = self.model
        if exps[0] >= m.N or any(e < 0 for e in exps):
            out: dict[int, int] = {}
        elif self.rank == 1 or exps[1] <= m.k:
            out = {self.index[exps]: 1}
        else:
            # p2^(k+1) = -sum_{i>=1} (-1)^i e_i(a) p1^i p2^(k+1-i)
            out = {}
            for i in range(1, m.k + 1):
                coef = -((-1) ** i) * self._elem[i]
                if coef:
                    for w, c in self.reduce_monomial((exps[0] + i, exps[1] - i)).items():
                        out[w] = out.get(w, 0) + coef * c
            out = {w: c for w, c in out.items() if c}
        self._reduced[exps] = out
        return out

    # -- constructors -------------------------------------------------------
    def _vec(self, coeffs) -> "AlgebraElement":
        return AlgebraElement(self, coeffs)

    def zeros(self):
        return [0] * self.size if self.exact else np.zeros(self.size, dtype=complex)

    def zero(self) -> "AlgebraElement":
        return self._vec(self.zeros())

    def scalar(self, c) -> "AlgebraElement":
        v = self.zeros()
        v[0] = c
        return self._vec(v)

    def one(self) -> "AlgebraElement":
        return self.scalar(1)

    def element(self, coeffs: Sequence) -> "AlgebraElement":
        if len(coeffs) != self.size:
            raise ConfigError("coefficient vector has the wrong length")
        if self.exact:
            return self._vec([_exact(c) for c in coeffs])
        return self._vec(np.asarray(coeffs, dtype=complex))

    def from_poly(self, poly: Mapping[tuple[int, ...], object]) -> "AlgebraElement":
        """Reduce an arbitrary polynomial ``{exponents: coefficient}``."""
        v = self.zeros()
        for exps, c in poly.items():
            if c:
                for w, k in self.reduce_monomial(tuple(exps)).items():
                    v[w] += (c if self.exact else complex(c)) * k
        return self._vec(v)

    def p(self, i: int) -> "AlgebraElement":
        """The generator ``p_i`` (1-based)."""
        exps = tuple(int(t == i - 1) for t in range(self.rank))
        return self.from_poly({exps: 1})

    def linear(self, coeffs: Sequence) -> "AlgebraElement":
        """``sum_i coeffs[i] p_{i+1}``."""
        out = self.zero()
        for i, c in enumerate(coeffs):
            if c:
                out = out + self.p(i + 1) * c
        return out

    def alpha(self, column: Sequence[int]) -> "AlgebraElement":
        return self.linear(column)

    def c1(self) -> "AlgebraElement":
        return self.linear(self.model.c1)

    def float_twin(self) -> "NilpotentAlgebra":
        return build_algebra(self.model, "float")

    def mul(self, x: "AlgebraElement", y: "AlgebraElement") -> "AlgebraElement":
        if x.algebra is not self or y.algebra is not self:
            raise ConfigError("elements belong to different algebras")
        if not self.exact:
            m = np.tensordot(y.coeffs, self._tensor, axes=([0], [1]))
            return self._vec(x.coeffs @ m)
        out = [0] * self.size
        yc = y.coeffs
        for u, xu in enumerate(x.coeffs):
            if xu:
                for v, w, c in self._rows[u]:
                    yv = yc[v]
                    if yv:
                        out[w] += xu * yv * c
        return self._vec(out)

    def __repr__(self) -> str:
        return f"NilpotentAlgebra({self.model.label}, {self.backend})"


def _exact(c):
    if isinstance(c, (int, Fraction)):
        return c
    if isinstance(c, str):
        return Fraction(c)
    raise ConfigError(f"exact backend needs int/Fraction coefficients, got {type(c).__name__}")


def build_algebra(model: RankTwoModel, backend: str = "exact") -> NilpotentAlgebra:
    """Build (and cache) the cohomology algebra of a compact smooth model."""
    if not isinstance(model, RankTwoModel):
        raise ConfigError("build_algebra needs a normal-form model")
    return _cached_algebra(model, backend)


@lru_cache(maxsize=None)
def _cached_algebra(model: RankTwoModel, backend: str) -> NilpotentAlgebra:
    return NilpotentAlgebra(model, backend)


class AlgebraElement:
    """Coefficient vector over the monomial basis of a :class:`NilpotentAlgebra`."""

    __slots__ = ("algebra", "coeffs")

    def __init__(self, algebra: NilpotentAlgebra, coeffs) -> None:
        self.algebra = algebra
        self.coeffs = coeffs

    def _coerce(self, other) -> "AlgebraElement":
        if isinstance(other, AlgebraElement):
            if other.algebra is not self.algebra:
                raise ConfigError("elements belong to different algebras")
            return other
        return self.algebra.scalar(other)

    def __add__(self, other):
        o = self._coerce(other)
        if self.algebra.exact:
            return AlgebraElement(self.algebra, [x + y for x, y in zip(self.coeffs, o.coeffs)])
        return AlgebraElement(self.algebra, self.coeffs + o.coeffs)

    __radd__ = __add__

    def __neg__(self):
        if self.algebra.exact:
            return AlgebraElement(self.algebra, [-x for x in self.coeffs])
        return AlgebraElement(self.algebra, -self.coeffs)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c) -> "AlgebraElement":
        if self.algebra.exact:
            return AlgebraElement(self.algebra, [x * c for x in self.coeffs])
        return AlgebraElement(self.algebra, self.coeffs * complex(c))

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return self.algebra.mul(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, AlgebraElement):
            return self * other.inverse()
        return self.scale(ts.recip(other) if self.algebra.exact else 1 / other)

    def __pow__(self, k: int):
        base = self if k >= 0 else self.inverse()
        out = self.algebra.one()
        for _ in range(abs(k)):
            out = out * base
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, AlgebraElement):
            other = self._coerce(other)
        if other.algebra.model != self.algebra.model:
            return False
        return all(x == y for x, y in zip(self.coeffs, other.coeffs))

    def __hash__(self):  # pragma: no cover - elements are values but mutable-backed
        return hash(tuple(self.coeffs))

    @property
    def constant(self):
        return self.coeffs[0]

    def degree_part(self, m: int) -> "AlgebraElement":
        v = self.algebra.zeros()
        for i, d in enumerate(self.algebra.degrees):
            if d == m:
                v[i] = self.coeffs[i]
        return AlgebraElement(self.algebra, v)

    def is_zero(self) -> bool:
        return all(x == 0 for x in self.coeffs)

    def max_abs(self) -> float:
        return max(abs(complex(x)) for x in self.coeffs)

    def inverse(self) -> "AlgebraElement":
        c = self.constant
        if c == 0:
            raise PoleError("element with zero degree-0 part is not invertible")
        rc = ts.recip(c) if self.algebra.exact else 1 / c
        nil = self * rc - 1
        out = self.algebra.one()
        term = self.algebra.one()
        for _ in range(self.algebra.dim):
            term = term * (-nil)
            out = out + term
        return out * rc

    def coefficient(self, exps: Sequence[int]):
        return self.coeffs[self.algebra.index[tuple(exps)]]

    def to_poly(self) -> dict[tuple[int, ...], object]:
        return {m: c for m, c in zip(self.algebra.basis, self.coeffs) if c != 0}

    def to_float(self) -> "AlgebraElement":
        if not self.algebra.exact:
            return self
        twin = self.algebra.float_twin()
        return AlgebraElement(twin, np.array([complex(x) for x in self.coeffs], dtype=complex))

    def to_json(self) -> dict[str, object]:
        out = {}
        for m, c in zip(self.algebra.basis, self.coeffs):
            if c != 0:
                out[monomial_name(m)] = _json_scalar(c)
        return out

    def __repr__(self) -> str:
        terms = [f"{_json_scalar(c)}*{monomial_name(m)}" for m, c in zip(self.algebra.basis, self.coeffs) if c != 0]
        return "AlgebraElement(" + (" + ".join(terms) or "0") + ")"


def monomial_name(m: Sequence[int]) -> str:
    if len(m) == 1:
        names = ["p"]
    else:
        names = ["p1", "p2"]
    parts = [n if e == 1 else f"{n}^{e}" for n, e in zip(names, m) if e]
    return "*".join(parts) or "1"


def _json_scalar(c):
    if isinstance(c, int):
        return str(c)
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    c = complex(c)
    return [float(f"{c.real:.17g}"), float(f"{c.imag:.17g}")]


# --- analytic calculus ------------------------------------------------------

class ScalarSeries:
    """A named scalar function that can produce Taylor coefficients.

    ``taylor(x0, n)`` returns ``[f(x0), f'(x0), f''(x0)/2!, ..., f^(n)(x0)/n!]``.
    """

    def __init__(self, name: str, taylor: Callable[[object, int], list]) -> None:
        self.name = name
        self._taylor = taylor

    def taylor(self, x0, n: int) -> list:
        return self._taylor(x0, n)

    def reciprocal(self) -> "ScalarSeries":
        return ScalarSeries(f"1/{self.name}", lambda x0, n: _inv_or_pole(self.taylor(x0, n), n, self.name, x0))

    def power(self, s: int) -> "ScalarSeries":
        return ScalarSeries(f"({self.name})^{s}", lambda x0, n: ts.power(self.taylor(x0, n), s, n))

    def __repr__(self) -> str:
        return f"ScalarSeries({self.name})"


def _inv_or_pole(coeffs, n, name, x0):
    if coeffs[0] == 0:
        raise PoleError(f"1/{name} has a pole at degree-0 part {x0}")
    return ts.inv(coeffs, n)


def analytic_apply(f: ScalarSeries, x: AlgebraElement) -> AlgebraElement:
    """``sum_m f^(m)(x0)/m! (x - x0)^m`` where ``x0`` is the degree-0 part of ``x``."""
    alg = x.algebra
    x0 = x.constant
    if alg.exact:
        pass
    elif isinstance(x0, complex) and x0.imag == 0:
        x0 = x0.real
    coeffs = f.taylor(x0, alg.dim)
    if alg.exact and not all(isinstance(c, (int, Fraction)) for c in coeffs):
        raise ConfigError(f"{f.name} has non-rational Taylor coefficients; use the float backend")
    nil = x - x.constant
    out = alg.scalar(coeffs[alg.dim])
    for m in range(alg.dim - 1, -1, -1):  # Horner
        out = out * nil + coeffs[m]
    return out


def degree_scale(t, x: AlgebraElement) -> AlgebraElement:
    """Multiply the degree-m component of ``x`` by ``t**m``."""
    alg = x.algebra
    if alg.exact:
        powers = [t ** d if d else 1 for d in alg.degrees]
        return AlgebraElement(alg, [c * w for c, w in zip(x.coeffs, powers)])
    powers = np.array([complex(t) ** d if d else 1 for d in alg.degrees])
    return AlgebraElement(alg, x.coeffs * powers)


def _exp_taylor(x0, n):
    if x0 == 0:
        return ts.exp_linear(Fraction(1), n) if isinstance(x0, (int, Fraction)) else [1 / math.factorial(m) for m in range(n + 1)]
    e = cmath.exp(x0) if isinstance(x0, complex) else math.exp(x0)
    return [e / math.factorial(m) for m in range(n + 1)]


def _log_taylor(x0, n):
    if x0 == 0:
        raise PoleError("log has a singularity at 0")
    exact = isinstance(x0, (int, Fraction))
    if exact and x0 == 1:
        return [0] + [Fraction((-1) ** (m + 1), m) for m in range(1, n + 1)]
    c0 = cmath.log(x0) if (isinstance(x0, complex) or x0 < 0) else math.log(x0)
    return [c0] + [(-1) ** (m + 1) / (m * x0 ** m) for m in range(1, n + 1)]


EXP = ScalarSeries("exp", _exp_taylor)
LOG = ScalarSeries("log", _log_taylor)


def _todd_taylor(x0, n):
    if x0 == 0:
        return ts.todd(n)
    # (x0 + t) / (1 - e^-x0 e^-t)
    c = math.exp(-x0)
    den = [1 - c] + [-c * (-1) ** m / math.factorial(m) for m in range(1, n + 1)]
    return ts.mul([x0, 1], _inv_or_pole(den, n, "todd", x0), n)


TODD = ScalarSeries("t/(1-exp(-t))", _todd_taylor)


def _is_int(x) -> bool:
    return float(getattr(x, "real", x)) == math.floor(float(getattr(x, "real", x))) and getattr(x, "imag", 0) == 0


def _gamma_taylor(x0, n):
    x0 = float(getattr(x0, "real", x0))
    if _is_int(x0) and x0 <= 0:
        raise PoleError(f"Gamma has a pole at {x0}")
    if _is_int(x0):
        # log Gamma(1 + t) = -gamma t + sum_{k>=2} (-1)^k zeta(k) t^k / k
        lg = [0.0, -float(EULER_GAMMA)] + [(-1) ** k * float(ZETA[k]) / k for k in range(2, n + 1)]
        out = ts.exp(lg, n, const=1.0)
        for i in range(1, int(x0)):
            out = ts.mul(out, [float(i), 1.0], n)
        return out
    import mpmath

    g = mpmath.gamma(x0)
    lg = [0.0] + [float(mpmath.polygamma(m - 1, x0)) / math.factorial(m) for m in range(1, n + 1)]
    return ts.exp(lg, n, const=float(g))


GAMMA = ScalarSeries("Gamma", _gamma_taylor)
GAMMA_ONE_PLUS = ScalarSeries("Gamma(1+t)", lambda x0, n: _gamma_taylor(1 + x0, n))


def _log_gamma_q_derivs(q: float, y: float, n: int) -> list:
    """Taylor coefficients m >= 1 of log gamma_q(y + t), y >= 1."""
    L = math.log(q)
    out = [0.0]
    for m in range(1, n + 1):
        s = 0.0
        j = 1
        while True:
            term = (-j * L) ** m * q ** (-j * y) / (j * (1 - q ** (-j)))
            s += term
            rho = ((j + 1) / j) ** (m - 1) * q ** (-y)
            if j * L * y > m and rho < 1 and abs(term) * rho / (1 - rho) < 1e-17 * max(abs(s), 1e-300):
                break
            j += 1
            if j > 10**7:
                raise PoleError("log-derivative series of gamma_q did not converge")
        out.append(s / math.factorial(m))
    return out


def _gamma_q_taylor(q: float, x0, n: int) -> list:
    from .qfun import gamma_q

    x0 = float(getattr(x0, "real", x0))
    if _is_int(x0) and x0 <= 0:
        raise PoleError(f"gamma_q has a pole at {x0}")
    y, shift = x0, 0
    while y < 1:
        y += 1
        shift += 1
    base = ts.exp(_log_gamma_q_derivs(q, y, n), n, const=gamma_q(y, q))
    L = math.log(q)
    for i in range(shift):
        c = q ** (-(x0 + i))
        factor = [1 - c] + [-c * (-L) ** m / math.factorial(m) for m in range(1, n + 1)]
        base = ts.mul(base, ts.inv(factor, n), n)
    return base


def q_gamma_fn(q: float) -> ScalarSeries:
    return ScalarSeries(f"gamma_q[{q}]", lambda x0, n: _gamma_q_taylor(q, x0, n))


def t_gamma_q_fn(q: float) -> ScalarSeries:
    """The entire function ``t * gamma_q(t)`` near ``t = 0`` (or any regular point)."""
    L = math.log(q)

    def taylor(x0, n):
        x0 = float(getattr(x0, "real", x0))
        if x0 == 0:
            # t/(1 - q^-t) = (1/L) * s/(1 - e^-s), s = L t;  times gamma_q(1 + t)
            front = [float(c) * L ** (m - 1) for m, c in enumerate(ts.todd(n))]
            return ts.mul(front, _gamma_q_taylor(q, 1.0, n), n)
        return ts.mul([x0, 1.0], _gamma_q_taylor(q, x0, n), n)

    return ScalarSeries(f"t*gamma_q[{q}]", taylor)


def gamma_qinv_fn(q: float) -> ScalarSeries:
    lc = math.log(1 - 1 / q)

    def taylor(x0, n):
        x0 = float(getattr(x0, "real", x0))
        pref = [math.exp((1 - x0) * lc)] + [math.exp((1 - x0) * lc) * (-lc) ** m / math.factorial(m) for m in range(1, n + 1)]
        return ts.mul(pref, _gamma_q_taylor(q, x0, n), n)

    return ScalarSeries(f"Gamma_1/q[{q}]", taylor)


def q_power_fn(q: float) -> ScalarSeries:
    L = math.log(q)
    return ScalarSeries(f"{q}^t", lambda x0, n: [q ** float(getattr(x0, "real", x0)) * L ** m / math.factorial(m) for m in range(n + 1)])


def inv_one_minus_cq_fn(c, q: float) -> ScalarSeries:
    """``1 / (1 - c q^t)``."""
    L = math.log(q)

    def taylor(x0, n):
        cq = c * q ** float(getattr(x0, "real", x0))
        den = [1 - cq] + [-cq * L ** m / math.factorial(m) for m in range(1, n + 1)]
        return _inv_or_pole(den, n, f"1/(1-{c}*q^t)", x0)

    return ScalarSeries(f"1/(1-{c}*{q}^t)", taylor)


def t_gamma_c_fn(q: float) -> ScalarSeries:
    """``t * gamma^c_q(t)`` at ``t = 0`` for ``0 < q < 1``."""
    L = math.log(q)

    def taylor(x0, n):
        if float(getattr(x0, "real", x0)) != 0:
            raise ConfigError("t*gamma_q^c is only expanded at t = 0")
        # pi t / sin(pi t)
        sinc = [0.0] * (n + 1)
        for k in range(0, n // 2 + 1):
            sinc[2 * k] = (-1) ** k * math.pi ** (2 * k) / math.factorial(2 * k + 1)
        front = ts.inv(sinc, n)
        # log of (q^(1-t); q)_inf / (q; q)_inf
        lg = [0.0]
        for m in range(1, n + 1):
            s = 0.0
            j = 1
            while True:
                term = -((-j * L) ** m) * q ** j / (j * (1 - q ** j))
                s += term
                if j * abs(L) > m and abs(term) < 1e-18 * max(abs(s), 1e-300):
                    break
                j += 1
            lg.append(s / math.factorial(m))
        return ts.mul(front, ts.exp(lg, n, const=1.0), n)

    return ScalarSeries(f"t*gamma^c[{q}]", taylor)


# --- characteristic classes --------------------------------------------------

def _word_exponent(alg: NilpotentAlgebra, word) -> AlgebraElement:
    word = tuple(int(e) for e in word)
    if len(word) != alg.rank:
        raise ConfigError(f"K-word {word} has the wrong length for rank {alg.rank}")
    return alg.linear([-e for e in word])


def chern_character(alg: NilpotentAlgebra, word) -> AlgebraElement:
    """``ch`` of a Laurent word ``prod P_i^{e_i}`` (tuple of exponents) or of a
    K-linear combination ``{word: coefficient}``."""
    if isinstance(word, Mapping):
        out = alg.zero()
        for w, c in word.items():
            out = out + chern_character(alg, w) * c
        return out
    return analytic_apply(EXP, _word_exponent(alg, word))


def char_class(alg: NilpotentAlgebra, kind: str, q: float | None = None) -> AlgebraElement:
    """Multiplicative class of the tangent bundle from the roots ``alpha_j(p)``.

    ``kind``: ``todd``, ``gamma_hat``, ``q_gamma_hat`` (``q > 1``) or
    ``q_gamma_c_hat`` (``0 < q < 1``).  Trivial roots contribute 1; for
    ``q_gamma_hat`` the factor ``(log q)^r`` restores their normalisation.
    """
    if kind == "todd":
        f, pref = TODD, 1
    elif kind == "gamma_hat":
        f, pref = GAMMA_ONE_PLUS, 1
    elif kind == "q_gamma_hat":
        if q is None or not q > 1:
            raise ConfigError("q_gamma_hat needs q > 1")
        f, pref = t_gamma_q_fn(float(q)), math.log(q) ** alg.rank
    elif kind == "q_gamma_c_hat":
        if q is None or not 0 < q < 1:
            raise ConfigError("q_gamma_c_hat needs 0 < q < 1")
        f, pref = t_gamma_c_fn(float(q)), 1
    else:
        raise ConfigError(f"unknown characteristic class {kind!r}")
    if kind != "todd" and alg.exact:
        alg = alg.float_twin()
    out = alg.scalar(pref)
    cache: dict[tuple[int, ...], AlgebraElement] = {}
    for col in alg.model.columns:
        if col not in cache:
            cache[col] = analytic_apply(f, alg.alpha(col))
        out = out * cache[col]
    return out


def chq(alg: NilpotentAlgebra, q: float, x: AlgebraElement) -> AlgebraElement:
    """q-Chern character: ``degree_scale(log q, ch(E))`` for ``x = ch(E)``."""
    if x.algebra is not alg:
        raise ConfigError("element does not belong to the given algebra")
    return degree_scale(math.log(q), x.to_float() if alg.exact else x)
