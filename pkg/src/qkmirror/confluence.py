"""q -> 1 limits of K-theoretic objects.

Two routes.  The *series* route compares coefficients of the stripped
I-functions after rescaling ``Q_i -> (q-1)^(m_i) Q_i`` and ``p -> (q-1) p``;
it works for any sequence of q.  The *spiral* route uses the roots ``q_k`` of
``q^(k+1) - q^k - 1`` where ``q - 1 = q^(-k)``, so the rescaled Novikov
variables stay on the q-spiral and the logarithmic prefactor is an honest
integer power of the line bundles.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .algebra import EXP, analytic_apply, chern_character, degree_scale
from .errors import ConfigError
from .oscillatory import coh_oscillatory, fiber_dimension, jackson_oscillatory_detailed
from .series import degrees, i_coh, i_kth, novikov_sum
from .toric import RankTwoModel


@dataclass(frozen=True)
class SpiralPoint:
    k: int
    q: float
    a: float

    def exponent(self, Q: float) -> int:
        """Smallest integer ``b`` with ``b >= log(Q) / a``; then ``Q <= q^b < Q q``."""
        if not Q > 0:
            raise ConfigError("Q must be positive")
        return math.ceil(math.log(Q) / self.a - 1e-12)

    def exponents(self, Q: Sequence[float]) -> tuple[int, ...]:
        return tuple(self.exponent(x) for x in Q)


def solve_qk(k: int) -> SpiralPoint:
    """Root ``q_k > 1`` of ``q^(k+1) - q^k - 1``, found through ``a = q - 1``.

    Newton on ``log(a) + k log1p(a) = 0`` (increasing and concave in ``a``)
    from ``a = k^(-1/2)``, with bisection on ``(0, 1]`` as a fallback.
    """
    if int(k) != k or k < 1:
        raise ConfigError("k must be a positive integer")
    k = int(k)

    def h(a: float) -> float:
        return math.log(a) + k * math.log1p(a)

    a = k ** -0.5
    for _ in range(100):
        step = h(a) / (1 / a + k / (1 + a))
        nxt = a - step
        if not 0 < nxt <= 1:
            break
        if abs(step) <= 1e-17 * nxt:
            a = nxt
            break
        a = nxt
    else:  # pragma: no cover
        pass
    if not (0 < a <= 1 and abs(h(a)) < 1e-14):
        lo, hi = 1e-300, 1.0
        while hi - lo > 1e-17 * hi:
            mid = 0.5 * (lo + hi)
            if h(mid) < 0:
                lo = mid
            else:
                hi = mid
        a = 0.5 * (lo + hi)
    return SpiralPoint(k, 1.0 + a, a)


# --- series route -------------------------------------------------------------

@dataclass
class ConfluenceEntry:
    d: tuple[int, ...]
    basis: tuple[int, ...]
    target: float
    values: list[float]

    @property
    def errors(self) -> list[float]:
        return [abs(v - self.target) for v in self.values]


@dataclass
class ConfluenceTable:
    model: RankTwoModel
    qs: list
    entries: list[ConfluenceEntry] = field(default_factory=list)
    mode: str = "series"

    def rows(self) -> list[tuple]:
        """``(q, d, basis, value, target, error)`` in deterministic order."""
        out = []
        for e in self.entries:
            for q, v in zip(self.qs, e.values):
                out.append((float(q), e.d, e.basis, v, e.target, abs(v - e.target)))
        return out

    def entry(self, d: Sequence[int], basis: Sequence[int]) -> ConfluenceEntry:
        for e in self.entries:
            if e.d == tuple(d) and e.basis == tuple(basis):
                return e
        raise KeyError((tuple(d), tuple(basis)))

    def max_errors(self) -> list[float]:
        return [max((e.errors[i] for e in self.entries), default=0.0) for i in range(len(self.qs))]


def stripped_limit_table(model: RankTwoModel, D: int, qs: Sequence) -> ConfluenceTable:
    """Tabulate ``(q-1)^(|u| + <c1, d>) [ch I^K_d]_u`` against ``[I^coh_d(z=1)]_u``.

    Rational entries of ``qs`` (``Fraction``) are evaluated exactly and only the
    final value is rounded; floats use the float backend.
    """
    if not model.fano:
        raise ConfigError("confluence needs a Fano model")
    qs = list(qs)
    if any(not q > 1 for q in qs) or any(b >= a for a, b in zip(qs, qs[1:])):
        raise ConfigError("q-list must be strictly decreasing and > 1")
    if any(q < 1 + 1e-7 and not isinstance(q, Fraction) for q in qs):
        raise ConfigError("float q closer to 1 than 1e-7 is numerically unstable; pass a Fraction")
    coh = i_coh(model, D, Fraction(1))
    series = [i_kth(model, D, q) for q in qs]
    c1 = model.c1
    table = ConfluenceTable(model, qs)
    for d in degrees(model, D):
        shift = sum(x * y for x, y in zip(c1, d))
        for u in coh.algebra.basis:
            m = sum(u)
            vals = []
            for q, s in zip(qs, series):
                h = q - 1
                vals.append(float(h ** (m + shift) * s[d].coefficient(u)).real
                            if not isinstance(h, Fraction) else float(h ** (m + shift) * s[d].coefficient(u)))
            table.entries.append(ConfluenceEntry(d, u, float(coh[d].coefficient(u)), vals))
    return table


def richardson(table: ConfluenceTable, d: Sequence[int], basis: Sequence[int]) -> float:
    """Linear extrapolation to ``q = 1`` from the last two rows."""
    e = table.entry(d, basis)
    h1, h2 = float(table.qs[-2] - 1), float(table.qs[-1] - 1)
    v1, v2 = e.values[-2], e.values[-1]
    return (h1 * v2 - h2 * v1) / (h1 - h2)


def neville(table: ConfluenceTable, d: Sequence[int], basis: Sequence[int]) -> float:
    """Polynomial extrapolation to ``h = q - 1 = 0`` through every row."""
    e = table.entry(d, basis)
    hs = [float(q - 1) for q in table.qs]
    p = list(e.values)
    n = len(p)
    for level in range(1, n):
        for i in range(n - level):
            p[i] = (hs[i] * p[i + 1] - hs[i + level] * p[i]) / (hs[i] - hs[i + level])
    return p[0]


# --- spiral route -------------------------------------------------------------

@dataclass
class SpiralRow:
    k: int
    q: float
    b: tuple[int, ...]
    exponents: tuple[int, ...]
    error: float
    value: object = None
    target: object = None
    flagged: bool = False


def _warn_small_k(ks: Sequence[int]) -> None:
    if any(k < 5 for k in ks):
        warnings.warn("k < 5: the bound a_k < k^(-1/2) is not yet in force", RuntimeWarning, stacklevel=3)


def spiral_confluence_jfun(model: RankTwoModel, Q0: Sequence[float], ks: Sequence[int],
                           D: int = 16, prefactor: str = "rescaled") -> list[SpiralRow]:
    """Compare ``(q-1)^(deg-1) ch((1-q) P^b I^K(q, Q))`` with ``-exp(-p log Q0) I^coh(1, Q0)``.

    ``Q_i = (q-1)^(m_i) q^(b_i) = q^(b_i - k m_i)`` with ``b = b_k(Q0)``.  With
    ``prefactor="rescaled"`` the line-bundle power is taken at ``q^b`` (the
    point that converges to ``Q0``); ``"literal"`` uses the full exponent
    ``b - k m``, whose prefactor ``exp(k (q-1) c1)`` grows like ``k^c1``.
    """
    if prefactor not in ("rescaled", "literal"):
        raise ConfigError("prefactor must be 'rescaled' or 'literal'")
    if len(Q0) != model.rank or any(not x > 0 for x in Q0):
        raise ConfigError("Q0 must be positive, one per row")
    _warn_small_k(ks)
    coh = i_coh(model, D, 1.0)
    target_sum = novikov_sum(coh, Q=Q0, tol=1e-10).value
    alg = target_sum.algebra
    target = -(analytic_apply(EXP, alg.linear([-math.log(x) for x in Q0])) * target_sum)
    m = model.c1
    rows = []
    for k in ks:
        sp = solve_qk(k)
        q, h = sp.q, sp.a
        b = sp.exponents(Q0)
        B = tuple(bi - k * mi for bi, mi in zip(b, m))
        s = i_kth(model, D, q)
        weights = {d: q ** sum(x * y for x, y in zip(B, d)) for d in degrees(model, D)}
        total = novikov_sum(s, weights=weights, tol=1e-10).value
        word = b if prefactor == "rescaled" else B
        pref = degree_scale(h, chern_character(total.algebra, word))
        value = pref * degree_scale(h, total) * (-1.0)
        rows.append(SpiralRow(k, q, b, B, (value - target).max_abs(), value, target))
    return rows


def spiral_confluence_oscillatory(model: RankTwoModel, Q0: Sequence[float], ks: Sequence[int],
                                  quad_tol: float = 1e-12) -> list[SpiralRow]:
    """``(1 - 1/q_k)^(fiber dim)`` times the Jackson sum at ``q_k^(b - k m)`` against the
    classical oscillatory integral at ``z = 1, Q0``."""
    _warn_small_k(ks)
    rhs = coh_oscillatory(model, 1.0, Q0, quad_tol)
    dim = fiber_dimension(model)
    m = model.c1
    rows = []
    for k in ks:
        sp = solve_qk(k)
        b = sp.exponents(Q0)
        B = tuple(bi - k * mi for bi, mi in zip(b, m))
        jr = jackson_oscillatory_detailed(model, sp.q, B)
        lhs = (1 - 1 / sp.q) ** dim * jr.value
        rows.append(SpiralRow(k, sp.q, b, B, abs(lhs - rhs), lhs, rhs, flagged=jr.support_empty))
    return rows
