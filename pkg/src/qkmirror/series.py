"""Truncated Novikov series: cohomological and K-theoretic I-functions.

Series are stored without their logarithmic prefactors ("stripped").  The
prefactors only act through simple transport rules, which is how the
difference and differential operators below are applied coefficientwise:

* K-theory: ``P^(-l(Q))`` with ``l(q Q_i) = l(Q_i) - 1`` turns the shift
  ``q^(Q_i d/dQ_i)`` into multiplication by ``P_i q^(d_i)`` on the coefficient
  of ``Q^d``; hence ``q^(alpha_j(Q d/dQ))`` acts as ``U_j(P) q^(alpha_j(d))``.
* Cohomology: ``Q_i d/dQ_i`` applied to ``exp(-sum p log Q / z) Q^d`` gives
  ``(d_i - p_i / z)``; hence ``alpha_j(Q d/dQ)`` acts as ``alpha_j(d) - alpha_j(p)/z``.

K-theory classes are represented by their Chern characters, which is an
injective ring map into rational cohomology, so the exact checks stay exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

from .algebra import AlgebraElement, NilpotentAlgebra, analytic_apply, build_algebra, chern_character, degree_scale, EXP
from .errors import ConfigError, PoleError, TruncationError
from .toric import RankTwoModel

Degree = tuple[int, ...]

DEFAULT_DEGREE = 8


def degrees(model: RankTwoModel, D: int) -> Iterator[Degree]:
    """Effective degrees of total degree at most ``D`` in a fixed order."""
    if model.rank == 1:
        for d in range(D + 1):
            yield (d,)
        return
    for total in range(D + 1):
        for d1 in range(total, -1, -1):
            yield (d1, total - d1)


@dataclass
class NovikovSeries:
    """Coefficients ``d -> AlgebraElement`` of a truncated series in ``Q``.

    ``kind`` is ``"coh"`` or ``"kth"``; ``param`` is ``z`` or ``q``.  Attached
    series keep the prefactor element and its data in ``prefactor``.
    """

    model: RankTwoModel
    D: int
    kind: str
    param: object
    coeffs: dict[Degree, AlgebraElement]
    attached: bool = False
    prefactor: AlgebraElement | None = None
    prefactor_data: dict = field(default_factory=dict)

    @property
    def algebra(self) -> NilpotentAlgebra:
        return next(iter(self.coeffs.values())).algebra

    @property
    def exact(self) -> bool:
        return self.algebra.exact

    def __getitem__(self, d) -> AlgebraElement:
        return self.coeffs.get(tuple(d), self.algebra.zero())

    def map(self, f) -> "NovikovSeries":
        return replace(self, coeffs={d: f(c) for d, c in self.coeffs.items()})

    def scale(self, c) -> "NovikovSeries":
        return self.map(lambda x: x * c)

    def truncate(self, D: int) -> "NovikovSeries":
        return replace(self, D=D, coeffs={d: c for d, c in self.coeffs.items() if sum(d) <= D})

    def to_float(self) -> "NovikovSeries":
        out = self.map(lambda x: x.to_float())
        if self.prefactor is not None:
            out.prefactor = self.prefactor.to_float()
        return out

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs.values())

    def to_json(self) -> dict:
        return {",".join(map(str, d)): c.to_json() for d, c in self.coeffs.items()}


def _is_exact_number(x) -> bool:
    return isinstance(x, (int, Fraction))


def _algebra_for(model: RankTwoModel, param) -> NilpotentAlgebra:
    return build_algebra(model, "exact" if _is_exact_number(param) else "float")


def _distinct_columns(model: RankTwoModel) -> list[tuple[int, ...]]:
    seen: list[tuple[int, ...]] = []
    for c in model.columns:
        if c not in seen:
            seen.append(c)
    return seen


def _column_factor_table(model, alg, D, factor):
    """For each distinct column, ``s -> prod`` ratio of shifted factors.

    ``factor(col, r)`` is the r-th factor; the ratio is
    ``1 / prod_{r=1}^{s} factor`` for ``s >= 0`` and ``prod_{r=s+1}^{0} factor``
    for ``s < 0``.
    """
    tables = {}
    bound = D * max(1, max(abs(x) for c in model.columns for x in c))
    for col in _distinct_columns(model):
        table = {0: alg.one()}
        acc = alg.one()
        for s in range(1, bound + 1):
            acc = acc * factor(col, s).inverse()
            table[s] = acc
        acc = alg.one()
        for s in range(-1, -bound - 1, -1):
            acc = acc * factor(col, s + 1)
            table[s] = acc
        tables[col] = table
    return tables


def _assemble(model, alg, D, tables) -> dict[Degree, AlgebraElement]:
    coeffs = {}
    counts: dict[tuple[int, ...], int] = {}
    for c in model.columns:
        counts[c] = counts.get(c, 0) + 1
    for d in degrees(model, D):
        out = alg.one()
        for col, mult in counts.items():
            s = sum(x * y for x, y in zip(col, d))
            out = out * (tables[col][s] ** mult)
        coeffs[d] = out
    return coeffs


def i_coh(model: RankTwoModel, D: int = DEFAULT_DEGREE, z=Fraction(1)) -> NovikovSeries:
    """Stripped cohomological I-function.

    The coefficient of ``Q^d`` is ``prod_j 1 / prod_{r=1}^{alpha_j(d)} (alpha_j(p) - r z)``
    (a polynomial factor ``prod_{r=alpha_j(d)+1}^{0}`` when ``alpha_j(d) < 0``).
    Exact for rational ``z``.
    """
    if not model.fano:
        raise ConfigError("i_coh needs a Fano model")
    if z == 0:
        raise ConfigError("z must be nonzero")
    alg = _algebra_for(model, z)
    alphas = {c: alg.alpha(c) for c in _distinct_columns(model)}
    tables = _column_factor_table(model, alg, D, lambda col, r: alphas[col] - r * z)
    return NovikovSeries(model, D, "coh", z, _assemble(model, alg, D, tables))


def j_coh(model: RankTwoModel, D: int = DEFAULT_DEGREE, z=Fraction(1)) -> NovikovSeries:
    """``-z`` times the stripped cohomological I-function (Fano case)."""
    return i_coh(model, D, z).scale(-z)


def i_kth(model: RankTwoModel, D: int = DEFAULT_DEGREE, q=Fraction(2)) -> NovikovSeries:
    """Stripped K-theoretic I-function, coefficients stored as Chern characters.

    The coefficient of ``Q^d`` is ``prod_j 1 / prod_{r=1}^{alpha_j(d)} (1 - U_j q^r)``
    (``prod_{r=alpha_j(d)+1}^{0} (1 - U_j q^r)`` when negative).  A rational
    ``q`` gives exact rational coefficients; a float ``q`` the float backend.
    """
    if not model.fano:
        raise ConfigError("i_kth needs a Fano model")
    if q == 1 or q == 0:
        raise ConfigError("q must differ from 0 and 1")
    if not _is_exact_number(q) and not q > 1:
        raise ConfigError("numeric mode needs q > 1")
    alg = _algebra_for(model, q)
    units = {c: analytic_apply(EXP, -alg.alpha(c)) for c in _distinct_columns(model)}
    qp = (lambda r: Fraction(q) ** r) if _is_exact_number(q) else (lambda r: q ** r)
    try:
        tables = _column_factor_table(model, alg, D, lambda col, r: 1 - units[col] * qp(r))
    except PoleError as exc:
        raise PoleError(f"a scalar factor (1 - q^r) vanishes: {exc}") from exc
    return NovikovSeries(model, D, "kth", q, _assemble(model, alg, D, tables))


def attach_coh_prefactor(series: NovikovSeries, Q: Sequence[float]) -> NovikovSeries:
    """Multiply by ``exp(-sum_i p_i log(Q_i) / z)`` (float backend)."""
    if series.kind != "coh" or series.attached:
        raise ConfigError("attach_coh_prefactor needs a stripped cohomological series")
    if len(Q) != series.model.rank or any(not x > 0 for x in Q):
        raise ConfigError("Q values must be positive, one per row")
    fs = series.to_float()
    alg = fs.algebra
    logs = [math.log(x) for x in Q]
    pref = analytic_apply(EXP, alg.linear([-l / complex(series.param) for l in logs]))
    out = fs.map(lambda c: c * pref)
    out.attached = True
    out.prefactor = pref
    out.prefactor_data = {"Q": list(Q)}
    return out


def attach_kth_prefactor(series: NovikovSeries, q, b: Sequence[int]) -> NovikovSeries:
    """Multiply by ``ch(prod_i P_i^{b_i})`` where ``Q_i = q^{b_i}``."""
    if series.kind != "kth" or series.attached:
        raise ConfigError("attach_kth_prefactor needs a stripped K-theoretic series")
    if len(b) != series.model.rank or any(int(x) != x for x in b):
        raise ConfigError("Q must lie on the q-spiral: integer exponents b required")
    b = tuple(int(x) for x in b)
    pref = chern_character(series.algebra, b)
    out = series.map(lambda c: c * pref)
    out.attached = True
    out.prefactor = pref
    out.prefactor_data = {"q": q, "b": list(b)}
    return out


def strip(series: NovikovSeries) -> NovikovSeries:
    if not series.attached:
        return series
    inv = series.prefactor.inverse()
    out = series.map(lambda c: c * inv)
    out.attached = False
    out.prefactor = None
    out.prefactor_data = {}
    return out


def j_from_i_fano(series: NovikovSeries, q=None) -> NovikovSeries:
    """``J = (1 - q) I`` for the stripped K-theoretic I-function of a Fano model."""
    q = series.param if q is None else q
    return series.scale(1 - q)


def _shift(d: Degree, i: int) -> Degree:
    return tuple(x - (t == i - 1) for t, x in enumerate(d))


def qde_residual(series: NovikovSeries, i: int, q=None) -> NovikovSeries:
    """Apply the i-th q-difference operator to a stripped K-theoretic series.

    Coefficient of ``Q^d`` in the residual:
    ``prod_{m_ij>0} prod_{r<m_ij} (1 - q^-r U_j q^{alpha_j(d)}) c_d
    - prod_{m_ij<0} prod_{r<-m_ij} (1 - q^-r U_j q^{alpha_j(d - e_i)}) c_{d - e_i}``.
    """
    if series.kind != "kth" or series.attached or not series.exact:
        raise ConfigError("qde_residual needs a stripped exact K-theoretic series")
    q = Fraction(series.param if q is None else q)
    model = series.model
    alg = series.algebra
    units = {c: analytic_apply(EXP, -alg.alpha(c)) for c in _distinct_columns(model)}
    row = i - 1

    def side(d, sign):
        out = alg.one()
        for col in model.columns:
            m = col[row] * sign
            if m > 0:
                s = sum(x * y for x, y in zip(col, d))
                for r in range(m):
                    out = out * (1 - units[col] * q ** (s - r))
        return out

    res = {}
    for d in degrees(model, series.D):
        val = side(d, 1) * series[d]
        if d[row] >= 1:
            prev = _shift(d, i)
            val = val - side(prev, -1) * series[prev]
        res[d] = val
    return NovikovSeries(model, series.D, "kth", q, res)


def ode_residual_coh(series: NovikovSeries, i: int, z=None) -> NovikovSeries:
    """Apply the i-th differential operator to a stripped cohomological series.

    Coefficient of ``Q^d``:
    ``prod_{m_ij>0} prod_{r<m_ij} (r - alpha_j(d) + alpha_j(p)/z) c_d
    - z^{-m_i} prod_{m_ij<0} prod_{r<-m_ij} (r - alpha_j(d - e_i) + alpha_j(p)/z) c_{d - e_i}``.
    """
    if series.kind != "coh" or series.attached or not series.exact:
        raise ConfigError("ode_residual_coh needs a stripped exact cohomological series")
    z = Fraction(series.param if z is None else z)
    model = series.model
    alg = series.algebra
    alphas = {c: alg.alpha(c) / z for c in _distinct_columns(model)}
    row = i - 1
    m_i = model.c1[row]

    def side(d, sign):
        out = alg.one()
        for col in model.columns:
            m = col[row] * sign
            if m > 0:
                s = sum(x * y for x, y in zip(col, d))
                for r in range(m):
                    out = out * (alphas[col] + (r - s))
        return out

    res = {}
    for d in degrees(model, series.D):
        val = side(d, 1) * series[d]
        if d[row] >= 1:
            prev = _shift(d, i)
            val = val - side(prev, -1) * series[prev] * z ** (-m_i)
        res[d] = val
    return NovikovSeries(model, series.D, "coh", z, res)


def rescale_z(series: NovikovSeries, z) -> NovikovSeries:
    """``z^(1-deg) S(1, z^(-m) Q)`` for a stripped cohomological series built at ``z = 1``.

    For ``S = j_coh(model, D, 1)`` the result equals ``j_coh(model, D, z)``.
    """
    if series.kind != "coh" or series.attached:
        raise ConfigError("rescale_z acts on stripped cohomological series")
    if z == 0:
        raise ConfigError("z must be nonzero")
    exact = series.exact and _is_exact_number(z)
    src = series if exact or not series.exact else series.to_float()
    inv_z = Fraction(1) / z if exact else 1 / z
    c1 = series.model.c1
    out = {}
    for d, c in src.coeffs.items():
        w = z * inv_z ** sum(x * y for x, y in zip(c1, d))
        out[d] = degree_scale(inv_z, c) * w
    return NovikovSeries(series.model, series.D, "coh", z, out)


@dataclass(frozen=True)
class SumResult:
    value: AlgebraElement
    tail_bound: float
    D: int


def novikov_sum(series: NovikovSeries, weights: Mapping[Degree, float] | None = None,
                Q: Sequence[float] | None = None, tol: float = 1e-13) -> SumResult:
    """Sum ``sum_d Q^d c_d`` numerically, with a tail estimate from the last shells.

    Either explicit per-degree ``weights`` or Novikov values ``Q`` are given.
    Raises :class:`TruncationError` ("increase D") if the estimated tail
    exceeds ``tol`` relative to the sum.
    """
    fs = series.to_float() if series.exact else series
    alg = fs.algebra
    total = alg.zero()
    shells = [0.0] * (series.D + 1)
    for d in degrees(series.model, series.D):
        if weights is not None:
            w = weights[d]
        else:
            w = math.prod(x ** e for x, e in zip(Q, d))
        term = fs[d] * w
        total = total + term
        shells[sum(d)] = max(shells[sum(d)], term.max_abs())
    bound = _tail_estimate(shells)
    scale = max(total.max_abs(), 1e-300)
    if bound > tol * scale:
        raise TruncationError(f"increase D: estimated tail {bound:.3e} exceeds {tol:.1e} x |sum| at D = {series.D}")
    return SumResult(total, bound, series.D)


def _tail_estimate(shells: list[float]) -> float:
    """Geometric extrapolation of the largest terms of the last two shells."""
    D = len(shells) - 1
    last = shells[D]
    if last == 0:
        return 0.0
    if D == 0:
        return math.inf
    prev = shells[D - 1]
    if prev == 0:
        return math.inf
    rho = last / prev
    if rho >= 1:
        return math.inf
    # at most (D + 2) terms per shell in rank 2
    return (D + 2) * last * rho / (1 - rho)
