"""Oscillatory integrals on the mirror side and the pairings they equal.

The mirror fiber is parametrized by its free coordinates: the first ``N - 1``
of the ``N`` columns ``(1, 0)`` and all twisted columns ``(-a_j, 1)``.  The
last ``(1, 0)`` coordinate and the ``(0, 1)`` coordinate are then fixed by
the monomial constraints ``Q_1 = x_1 ... x_N prod x_t^(-a_t)`` and
``Q_2 = x_(N+1) prod x_t``.  In rank one all ``N`` columns are ``(1)`` and
only the last coordinate is dependent.

On the lattice ``x_j = q^(e_j)`` every Jackson factor is ``(q^(e-1); 1/q)_inf``,
which vanishes for ``e >= 1``.  So the K-theoretic sum is a finite sum over
free exponents ``<= 0`` whose dependent exponents are also ``<= 0``.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Sequence

from scipy import integrate as sp_integrate
from scipy import optimize as sp_optimize

from .algebra import EXP, analytic_apply, char_class, chern_character, degree_scale
from .errors import ConfigError, TruncationError
from .qfun import gamma_q, jackson, pochhammer_inf, q_exp_E
from .series import attach_coh_prefactor, degrees, i_coh, i_kth, novikov_sum
from .toric import RankTwoModel, integrate

DEFAULT_QUAD_TOL = 1e-12
DEFAULT_TAIL_TOL = 1e-12


def _relerr(lhs: float, rhs: float) -> float:
    return abs(lhs - rhs) / (abs(lhs) + abs(rhs) + 1e-300)


@dataclass
class ComparisonReport:
    lhs: float
    rhs: float
    abs_err: float
    rel_err: float
    metadata: dict = field(default_factory=dict)

    @classmethod
    def build(cls, lhs: float, rhs: float, **metadata) -> "ComparisonReport":
        return cls(lhs, rhs, abs(lhs - rhs), _relerr(lhs, rhs), metadata)

    def passed(self, tol: float, zero_floor: float = 1e-12) -> bool:
        """Relative error within ``tol``.

        When the lattice support is empty the left side is exactly 0 and the
        relative error is 1 whatever the right side's rounding; those cases
        pass iff ``|rhs| <= zero_floor``.
        """
        if self.metadata.get("support_empty"):
            return self.abs_err <= zero_floor
        return self.rel_err <= tol

    def to_json(self) -> dict:
        return asdict(self)


def _check_model(model: RankTwoModel) -> None:
    if not model.fano:
        raise ConfigError(f"model {model.label} is not Fano")


def _check_b(model: RankTwoModel, b: Sequence[int]) -> tuple[int, ...]:
    if len(b) != model.rank:
        raise ConfigError(f"expected {model.rank} exponents, got {len(b)}")
    if any(int(x) != x for x in b):
        raise ConfigError("Q must lie on the q-spiral: integer exponents required")
    return tuple(int(x) for x in b)


def fiber_dimension(model: RankTwoModel) -> int:
    return model.n - model.rank


# --- K-theoretic side ---------------------------------------------------------

def enumerate_support(model: RankTwoModel, b: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """All exponent vectors ``(e_1, ..., e_n)`` with every entry ``<= 0`` that
    satisfy the monomial constraints at ``Q = q^b``."""
    b = _check_b(model, b)
    N = model.N
    if model.rank == 1:
        for head in _bounded_nonpositive(N - 1, -b[0]):
            yield head + (b[0] - sum(head),)
        return
    b1, b2 = b
    k = model.k
    for tw in itertools.product(range(b2, 1), repeat=k):
        if sum(tw) < b2:
            continue
        budget = -b1 - sum(a * t for a, t in zip(model.a, tw))
        if budget < 0:
            continue
        for head in _bounded_nonpositive(N - 1, budget):
            last = b1 - sum(head) + sum(a * t for a, t in zip(model.a, tw))
            yield head + (last, b2 - sum(tw)) + tw


def _bounded_nonpositive(m: int, budget: int) -> Iterator[tuple[int, ...]]:
    """Tuples of ``m`` integers ``<= 0`` with ``-sum <= budget``."""
    if budget < 0:
        return
    if m == 0:
        yield ()
        return
    for first in range(0, -budget - 1, -1):
        for rest in _bounded_nonpositive(m - 1, budget + first):
            yield (first,) + rest


@dataclass
class JacksonResult:
    value: float
    points: int
    support_empty: bool
    tail_tol: float
    elapsed: float


def jackson_oscillatory_detailed(model: RankTwoModel, q: float, b: Sequence[int],
                                 tail_tol: float = DEFAULT_TAIL_TOL) -> JacksonResult:
    _check_model(model)
    if not q > 1:
        raise ConfigError("the Jackson oscillatory sum needs q > 1")
    start = time.perf_counter()
    q = float(q)
    n = model.n
    per_factor = tail_tol / n
    cache: dict[int, float] = {}

    def factor(e: int) -> float:
        if e not in cache:
            cache[e] = pochhammer_inf(q ** (e - 1), 1 / q, per_factor)[0]
        return cache[e]

    terms = []
    for exps in enumerate_support(model, b):
        terms.append(math.prod(factor(e) for e in exps))
    # fixed order, smallest first
    terms.sort()
    value = math.fsum(terms)
    return JacksonResult(value, len(terms), not terms, tail_tol, time.perf_counter() - start)


def jackson_oscillatory(model: RankTwoModel, q: float, b: Sequence[int],
                        tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    """Finite Jackson sum of ``prod_j E(x_j)`` over the lattice fiber at ``Q = q^b``."""
    return jackson_oscillatory_detailed(model, q, b, tail_tol).value


_MP_DPS = 50
_ABS_TAIL_FLOOR = 1e-14  # 1% of the empty-support pass floor


def _exact_q(q) -> Fraction | None:
    """``q`` as a rational with a small denominator, when it is one."""
    fq = Fraction(q)
    return fq if fq.denominator <= 10**6 else None


def _t_gamma_q_taylor_mp(q, n: int) -> list:
    """Taylor coefficients of ``t * gamma_q(t)`` at 0 in extended precision.

    ``t gamma_q(t) = (1/L) todd(L t) * (x; x)_inf / (x^(1+t); x)_inf`` with
    ``x = 1/q``; the log of the last ratio has coefficients
    ``sum_k (-k L)^m x^k / (k m! (1 - x^k))``.
    """
    import mpmath as mp

    from . import _taylor as ts

    qq = mp.mpf(q.numerator) / q.denominator if isinstance(q, Fraction) else mp.mpf(q)
    L = mp.log(qq)
    x = 1 / qq
    eps = mp.mpf(10) ** (-mp.mp.dps - 5)
    lg = [mp.mpf(0)]
    for m in range(1, n + 1):
        acc = mp.mpf(0)
        k = 1
        while True:
            term = (-k * L) ** m * x ** k / (k * mp.factorial(m) * (1 - x ** k))
            acc += term
            if k * L > m and abs(term) < eps * max(abs(acc), eps):
                break
            k += 1
        lg.append(acc)
    expo = [mp.mpf(1)] + [mp.mpf(0)] * n
    # exp of a series with zero constant term: e' = lg' e
    for m in range(1, n + 1):
        expo[m] = sum(j * lg[j] * expo[m - j] for j in range(1, m + 1)) / m
    todd = ts.todd(n)
    front = [mp.mpf(c.numerator) / c.denominator * L ** (m - 1) for m, c in enumerate(todd)]
    return [sum(front[i] * expo[m - i] for i in range(m + 1)) for m in range(n + 1)], L


def _poly_mul(a: dict, b: dict, top: int) -> dict:
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            if sum(e) <= top:
                out[e] = out.get(e, 0) + ca * cb
    return out


def _poly_power_series(coeffs: list, linear: dict, top: int) -> dict:
    """``sum_m coeffs[m] * linear^m`` truncated at degree ``top``."""
    r = len(next(iter(linear)))
    out = {(0,) * r: coeffs[0]}
    power = {(0,) * r: 1}
    for m in range(1, top + 1):
        power = _poly_mul(power, linear, top)
        for e, c in power.items():
            out[e] = out.get(e, 0) + coeffs[m] * c
    return out


def _kth_pairing_functional(model: RankTwoModel, q, basis) -> list:
    """``u -> (log q)^r int gamma_hat_q(TX) (log q)^deg(u) p^u`` for each basis monomial, in mpmath."""
    import mpmath as mp

    top = model.dim
    coeffs, L = _t_gamma_q_taylor_mp(q, top)
    r = model.rank
    unit = tuple(tuple(int(i == j) for j in range(r)) for i in range(r))
    cls = {(0,) * r: L ** r}
    for col in model.columns:
        linear = {unit[i]: col[i] for i in range(r) if col[i]}
        factor = _poly_power_series(coeffs, linear, top) if linear else {(0,) * r: coeffs[0]}
        cls = _poly_mul(cls, factor, top)
    out = []
    for u in basis:
        shifted = {tuple(x + y for x, y in zip(e, u)): c for e, c in cls.items()}
        out.append(integrate(model, shifted) * L ** sum(u))
    return out


def _to_mp(c):
    import mpmath as mp

    if isinstance(c, Fraction):
        return mp.mpf(c.numerator) / c.denominator
    if isinstance(c, complex):
        return mp.mpf(c.real)
    return mp.mpf(c)


@dataclass
class PairingResult:
    value: float
    tail_bound: float
    shells: list
    exact_series: bool


def rhs_pairing_kth_detailed(model: RankTwoModel, q, b: Sequence[int], D: int = 12,
                             tol: float = 1e-13, series=None, abs_floor: float = _ABS_TAIL_FLOOR) -> PairingResult:
    _check_model(model)
    b = _check_b(model, b)
    if not q > 1:
        raise ConfigError("rhs_pairing_kth needs q > 1")
    import mpmath as mp

    with mp.workdps(_MP_DPS):
        fq = _exact_q(q)
        if series is None:
            series = i_kth(model, D, fq if fq is not None else float(q))
        exact = series.exact
        qv = series.param if exact else float(q)
        alg = series.algebra
        pref = chern_character(alg, b)
        functional = _kth_pairing_functional(model, fq if fq is not None else float(q), alg.basis)
        shell_sums = [alg.zero() for _ in range(series.D + 1)]
        for d in degrees(model, series.D):
            w = qv ** sum(x * y for x, y in zip(b, d))
            shell_sums[sum(d)] = shell_sums[sum(d)] + series[d] * w
        shells = []
        for ssum in shell_sums:
            x = pref * ssum
            shells.append(mp.fsum(g * _to_mp(c) for g, c in zip(functional, x.coeffs)))
        total = mp.fsum(shells)
        magnitudes = [float(abs(v)) for v in shells]
    bound = _tail_estimate_scalar(magnitudes)
    # absolute floor: when the support is empty the pairing itself is 0
    allowed = tol * abs(float(total)) + abs_floor
    if bound > allowed:
        raise TruncationError(f"increase D: estimated Novikov tail {bound:.3e} exceeds {allowed:.3e} at D = {series.D}")
    return PairingResult(float(total), bound, [float(v) for v in shells], exact)


def _tail_estimate_scalar(mags: list[float]) -> float:
    """Geometric extrapolation of the shells after the last one.

    The ratio is taken over two-step windows of the last four shells, so a
    single shell that happens to cancel (or two noise-level shells) does not
    masquerade as divergence.
    """
    if mags[-1] == 0:
        return 0.0
    if len(mags) < 4 or min(mags[-4:-2]) == 0:
        return math.inf
    rho = max(math.sqrt(mags[-1] / mags[-3]), math.sqrt(mags[-2] / mags[-4]))
    if rho >= 1:
        return math.inf
    return max(mags[-1], mags[-2] * rho) * rho / (1 - rho)


def rhs_pairing_kth(model: RankTwoModel, q, b: Sequence[int], D: int = 12,
                    tol: float = 1e-13, series=None) -> float:
    """``int gamma_hat_q(TX) ch_q(P^b I(q, q^b))``, Novikov sum truncated at ``D``.

    The pairing cancels heavily (entries of the summed series can exceed the
    result by ten orders of magnitude), so for rational ``q`` the Novikov sum
    is done exactly and the final pairing in 50-digit arithmetic.
    """
    return rhs_pairing_kth_detailed(model, q, b, D, tol, series).value


def _integrate_float(model: RankTwoModel, element) -> float:
    val = complex(integrate(model, element))
    return val.real


def compare_kth(model: RankTwoModel, q: float, b: Sequence[int], D: int = 12,
                tail_tol: float = DEFAULT_TAIL_TOL, series_tol: float = 1e-13,
                series_floor: float = _ABS_TAIL_FLOOR) -> ComparisonReport:
    """Jackson sum against the pairing side.

    ``series_tol`` (relative) and ``series_floor`` (absolute) bound the
    estimated Novikov tail; a longer tail raises ``TruncationError``.
    """
    start = time.perf_counter()
    jr = jackson_oscillatory_detailed(model, q, b, tail_tol)
    pr = rhs_pairing_kth_detailed(model, q, b, D, series_tol, abs_floor=series_floor)
    return ComparisonReport.build(
        jr.value, pr.value, model=model.label, q=q, b=list(b), D=D, tail_tol=tail_tol,
        novikov_tail=pr.tail_bound, exact_series=pr.exact_series,
        support_points=jr.points, support_empty=jr.support_empty,
        log_q_normalization=f"(log q)^{model.rank}",
        elapsed=time.perf_counter() - start)


# --- classical side -----------------------------------------------------------

def _window(phi: Callable[[float], float], margin: float) -> tuple[float, float, float]:
    """Minimum of a convex ``phi`` and an interval outside which ``phi - min > margin``."""
    res = sp_optimize.minimize_scalar(phi, bracket=(-1.0, 1.0), options={"xtol": 1e-10})
    t0 = float(res.x)
    f0 = float(phi(t0))
    bounds = []
    for direction in (-1.0, 1.0):
        step = 1.0
        t = t0 + direction * step
        while phi(t) - f0 < margin:
            step *= 2.0
            t = t0 + direction * step
            if step > 1e4:
                raise ConfigError("integrand does not decay on the positive thimble")
        bounds.append(t)
    return t0, f0, bounds[0], bounds[1]


def _integrate_1d(phi: Callable[[float], float], tol: float, margin: float = 60.0) -> tuple[float, float]:
    """``int exp(-phi)`` over the line, returned as ``(value * exp(f0), f0)``."""
    t0, f0, lo, hi = _window(phi, margin)
    val, _ = sp_integrate.quad(lambda t: math.exp(f0 - phi(t)), lo, hi, points=[t0],
                               epsabs=0.0, epsrel=tol, limit=400)
    return val, f0


def _phase(model: RankTwoModel, z: float, Q: Sequence[float]) -> Callable[[Sequence[float]], float]:
    """``W / z`` as a function of the free log coordinates."""
    N = model.N
    logQ = [math.log(x) for x in Q]
    if model.rank == 1:
        def phi(t):
            return (sum(math.exp(s) for s in t) + math.exp(logQ[0] - sum(t))) / z
        return phi
    a = model.a
    k = model.k

    def phi(t):
        head, tw = t[:N - 1], t[N - 1:]
        last = logQ[0] - sum(head) + sum(ai * ti for ai, ti in zip(a, tw))
        fib = logQ[1] - sum(tw)
        return (sum(math.exp(s) for s in t) + math.exp(last) + math.exp(fib)) / z

    assert k == len(tuple(a))
    return phi


def coh_oscillatory(model: RankTwoModel, z: float, Q: Sequence[float],
                    quad_tol: float = DEFAULT_QUAD_TOL) -> float:
    """``int exp(-W/z)`` over the positive real fiber with the log-coordinate volume form."""
    _check_model(model)
    if not z > 0:
        raise ConfigError("z must be positive")
    if len(Q) != model.rank or any(not x > 0 for x in Q):
        raise ConfigError("Q values must be positive, one per row")
    dim = fiber_dimension(model)
    if dim > 2:
        raise ConfigError(f"fiber dimension {dim} > 2 is not supported by the quadrature")
    phi = _phase(model, z, Q)
    if dim == 0:
        return math.exp(-phi(()))
    if dim == 1:
        val, f0 = _integrate_1d(lambda t: phi((t,)), quad_tol)
        return val * math.exp(-f0)

    def profile(t1: float) -> float:
        res = sp_optimize.minimize_scalar(lambda t2: phi((t1, t2)), bracket=(-1.0, 1.0), options={"xtol": 1e-10})
        return float(res.fun)

    inner_tol = quad_tol / 10

    def inner(t1: float, shift: float) -> float:
        val, f0 = _integrate_1d(lambda t2: phi((t1, t2)), inner_tol)
        return val * math.exp(shift - f0)

    t0, g0, lo, hi = _window(profile, 60.0)
    val, _ = sp_integrate.quad(lambda t1: inner(t1, g0), lo, hi, points=[t0],
                               epsabs=0.0, epsrel=quad_tol, limit=400)
    return val * math.exp(-g0)


def rhs_pairing_coh(model: RankTwoModel, z: float, Q: Sequence[float], D: int = 24,
                    tol: float = 1e-13) -> float:
    """``int Gamma_hat(TX) z^c1 z^deg (prefactor * I(z, Q))``."""
    _check_model(model)
    if not z > 0:
        raise ConfigError("z must be positive")
    s = i_coh(model, D, float(z))
    total = novikov_sum(s, Q=Q, tol=tol).value
    alg = total.algebra
    logs = [math.log(x) for x in Q]
    pref = analytic_apply(EXP, alg.linear([-l / z for l in logs]))
    zrho = analytic_apply(EXP, alg.c1() * math.log(z))
    integrand = char_class(alg, "gamma_hat") * zrho * degree_scale(float(z), pref * total)
    return _integrate_float(model, integrand)


def compare_coh(model: RankTwoModel, z: float, Q: Sequence[float], D: int = 24,
                quad_tol: float = DEFAULT_QUAD_TOL) -> ComparisonReport:
    start = time.perf_counter()
    lhs = coh_oscillatory(model, z, Q, quad_tol)
    rhs = rhs_pairing_coh(model, z, Q, D)
    return ComparisonReport.build(lhs, rhs, model=model.label, z=z, Q=list(Q), D=D,
                                  quad_tol=quad_tol, elapsed=time.perf_counter() - start)


# --- Mellin factorization -----------------------------------------------------

def q_mellin_factor_check(model: RankTwoModel, q: float, p: Sequence[float],
                          tol: float = 1e-14) -> ComparisonReport:
    """Columnwise Jackson integrals of the E-factor against ``prod_j gamma_q(alpha_j(p))``."""
    if len(p) != model.rank:
        raise ConfigError(f"expected {model.rank} Mellin variables")
    weights = [sum(c * x for c, x in zip(col, p)) for col in model.columns]
    if any(not w > 0 for w in weights):
        raise ConfigError("p lies outside the convergence strip")
    q = float(q)
    f = lambda x: q_exp_E(x, q)
    lhs = math.prod(jackson(f, q, w, tol) for w in weights)
    rhs = math.prod(gamma_q(w, q) for w in weights)
    return ComparisonReport.build(lhs, rhs, model=model.label, q=q, p=list(p))
