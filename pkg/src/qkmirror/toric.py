"""Toric input data: validation, rank-2 normal form, residue integration.

A model is described by an integer weight matrix whose columns are the
vectors ``alpha_j`` together with a chamber.  In normal form the rank-2
matrix has ``N`` columns ``(1, 0)``, one column ``(0, 1)`` and columns
``(-a_j, 1)``; the rank-1 mode has ``N`` columns ``(1,)`` (projective space).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import ConfigError, NotNormalizableError, UnsupportedRankError

try:  # Python >= 3.11
    import tomllib as _toml
except ModuleNotFoundError:  # pragma: no cover - exercised on 3.10
    import tomli as _toml

Vector = tuple[int, ...]
Matrix = tuple[tuple[int, ...], ...]


def _det2(u: Sequence[int], v: Sequence[int]) -> int:
    return u[0] * v[1] - u[1] * v[0]


@dataclass(frozen=True)
class MomentData:
    """Weight matrix (rows = torus factors) plus chamber.

    ``chamber`` is ``"positive_orthant"`` or, for rank 2, a pair of integer
    rays spanning the open chamber (used when a row transformation has been
    applied to normal-form data).
    """

    matrix: Matrix
    chamber: str | tuple[Vector, ...] = "positive_orthant"

    def __post_init__(self) -> None:
        rows = tuple(tuple(int(x) for x in row) for row in self.matrix)
        if not rows or any(len(row) != len(rows[0]) for row in rows):
            raise ConfigError("matrix must be a non-empty rectangular integer array")
        object.__setattr__(self, "matrix", rows)
        if isinstance(self.chamber, str):
            if self.chamber != "positive_orthant":
                raise ConfigError(f"unsupported chamber {self.chamber!r}")
        else:
            rays = tuple(tuple(int(x) for x in ray) for ray in self.chamber)
            object.__setattr__(self, "chamber", rays)

    @property
    def r(self) -> int:
        return len(self.matrix)

    @property
    def n(self) -> int:
        return len(self.matrix[0])

    @property
    def columns(self) -> list[Vector]:
        return [tuple(row[j] for row in self.matrix) for j in range(self.n)]

    def chamber_rays(self) -> tuple[Vector, ...]:
        if isinstance(self.chamber, str):
            return tuple(tuple(int(i == j) for j in range(self.r)) for i in range(self.r))
        return self.chamber

    def transformed(self, rows: Sequence[Sequence[int]], column_order: Sequence[int] | None = None) -> "MomentData":
        """Apply an integer row transformation (and optional column permutation)."""
        A = [list(map(int, row)) for row in rows]
        cols = self.columns
        if column_order is not None:
            cols = [cols[j] for j in column_order]
        new_cols = [tuple(sum(A[i][t] * c[t] for t in range(self.r)) for i in range(self.r)) for c in cols]
        rays = [tuple(sum(A[i][t] * c[t] for t in range(self.r)) for i in range(self.r)) for c in self.chamber_rays()]
        matrix = tuple(tuple(c[i] for c in new_cols) for i in range(self.r))
        return MomentData(matrix, tuple(rays))


@dataclass(frozen=True)
class RankTwoModel:
    """Normal-form model: ``N`` and the twists ``a``; ``rank=1`` gives P^(N-1)."""

    N: int
    a: tuple[int, ...] = ()
    rank: int = 2

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", tuple(int(x) for x in self.a))
        if self.N < 1:
            raise ConfigError("N must be a positive integer")
        if self.rank not in (1, 2):
            raise UnsupportedRankError(f"rank {self.rank} is not supported")
        if self.rank == 1 and self.a:
            raise ConfigError("rank-1 models have no twist list")
        if any(x < 0 for x in self.a):
            raise ConfigError("twists a_j must be nonnegative")

    @property
    def k(self) -> int:
        return len(self.a)

    @property
    def n(self) -> int:
        return self.N + self.k + 1 if self.rank == 2 else self.N

    @property
    def dim(self) -> int:
        return self.N - 1 + self.k

    @property
    def columns(self) -> list[Vector]:
        if self.rank == 1:
            return [(1,)] * self.N
        return [(1, 0)] * self.N + [(0, 1)] + [(-x, 1) for x in self.a]

    @property
    def matrix(self) -> Matrix:
        cols = self.columns
        return tuple(tuple(c[i] for c in cols) for i in range(self.rank))

    @property
    def c1(self) -> Vector:
        if self.rank == 1:
            return (self.N,)
        return (self.N - sum(self.a), self.k + 1)

    @property
    def fano(self) -> bool:
        return self.N > sum(self.a) if self.rank == 2 else self.N >= 1

    def alpha(self, d: Sequence[int]) -> list[int]:
        """Pairings ``alpha_j(d)`` of every column with a degree or exponent vector."""
        return [sum(c[i] * d[i] for i in range(self.rank)) for c in self.columns]

    def moment_data(self) -> MomentData:
        return MomentData(self.matrix)

    @property
    def label(self) -> str:
        if self.rank == 1:
            return f"P{self.N - 1}"
        return f"N={self.N},a=[{','.join(map(str, self.a))}]"


@dataclass(frozen=True)
class ValidationReport:
    compact: bool
    smooth: bool
    fano: bool
    c1: Vector
    failure_witness: str | None = None

    def to_json(self) -> dict:
        return {"compact": self.compact, "smooth": self.smooth, "fano": self.fano,
                "c1": list(self.c1), "failure_witness": self.failure_witness}


@dataclass(frozen=True)
class Normalization:
    """Normal form with the row transformation and column order that produce it."""

    model: RankTwoModel
    row_transform: tuple[tuple[int, ...], ...]
    column_order: tuple[int, ...]


# --- geometry helpers ------------------------------------------------------

def _chamber_coords(data: MomentData, v: Sequence[int]) -> tuple[Fraction, ...]:
    """Coordinates of ``v`` in the chamber's ray basis (open chamber = all > 0)."""
    rays = data.chamber_rays()
    if data.r == 1:
        return (Fraction(v[0], rays[0][0]),)
    r1, r2 = rays
    det = _det2(r1, r2)
    if det == 0:
        raise ConfigError("chamber rays are linearly dependent")
    return (Fraction(_det2(v, r2), det), Fraction(_det2(r1, v), det))


def _in_open_chamber(data: MomentData, v: Sequence[int]) -> bool:
    return all(c > 0 for c in _chamber_coords(data, v))


def _cone_meets_chamber(data: MomentData, u: Sequence[int], v: Sequence[int]) -> bool:
    """Whether the closed cone on ``u, v`` meets the open chamber."""
    cu, cv = _chamber_coords(data, u), _chamber_coords(data, v)
    lo, hi = Fraction(0), Fraction(1)
    for A, B in zip(cu, cv):
        # positivity set of A + s (B - A) on [0, 1]
        if A > 0 and B > 0:
            continue
        if A <= 0 and B <= 0:
            return False
        s = A / (A - B)
        if A > 0:
            hi = min(hi, s)
        else:
            lo = max(lo, s)
    return lo < hi


def _pointed(cols: list[Vector]) -> bool:
    if len(cols[0]) == 1:
        return all(c[0] > 0 for c in cols) or all(c[0] < 0 for c in cols)
    for s in cols:
        if all(_det2(s, c) > 0 or (_det2(s, c) == 0 and s[0] * c[0] + s[1] * c[1] > 0) for c in cols):
            return True
    return False


def validate(data: MomentData) -> ValidationReport:
    """Compactness, smoothness and the Fano property of the toric quotient."""
    if data.r > 2:
        raise UnsupportedRankError(f"rank {data.r} > 2 is not supported")
    if data.n < data.r:
        raise ConfigError("need at least as many columns as rows")
    cols = data.columns
    for j, c in enumerate(cols):
        if not any(c):
            raise ConfigError(f"column {j} is zero")
    c1 = tuple(sum(c[i] for c in cols) for i in range(data.r))
    compact = _pointed(cols)
    witness = None if compact else "the columns do not lie in an open half-space"
    smooth = True
    if data.r == 1:
        for j, c in enumerate(cols):
            if _in_open_chamber(data, c) and abs(c[0]) != 1:
                smooth = False
                witness = witness or f"column {{{j}}} meets the chamber with determinant {c[0]}"
                break
    else:
        for i, j in itertools.combinations(range(data.n), 2):
            det = _det2(cols[i], cols[j])
            if det != 0 and abs(det) != 1 and _cone_meets_chamber(data, cols[i], cols[j]):
                smooth = False
                witness = witness or f"columns {{{i}, {j}}} meet the chamber with determinant {det}"
                break
    fano = compact and smooth and _in_open_chamber(data, c1)
    return ValidationReport(compact, smooth, fano, c1, witness)


def normalize_rank2_detailed(data: MomentData) -> Normalization:
    """Bring compact smooth rank-2 data to the normal form ``(N, a)``."""
    if data.r != 2:
        raise NotNormalizableError("normalize_rank2 requires a rank-2 matrix")
    report = validate(data)
    if not (report.compact and report.smooth):
        raise NotNormalizableError(f"not rank-2 normalizable: {report.failure_witness}")
    cols = data.columns
    r1, r2 = data.chamber_rays()
    xi = (r1[0] + r2[0], r1[1] + r2[1])
    left = [j for j, c in enumerate(cols) if _det2(xi, c) > 0]
    right = [j for j, c in enumerate(cols) if _det2(xi, c) < 0]
    for j, c in enumerate(cols):
        if _det2(xi, c) == 0 and xi[0] * c[0] + xi[1] * c[1] > 0:
            raise NotNormalizableError(f"column {j} lies inside the chamber")
    if not left or not right:
        raise NotNormalizableError("the chamber is not bounded by columns on both sides")
    # nearest column on each side of xi
    j2 = next(j for j in left if all(_det2(cols[j], cols[t]) >= 0 for t in left))
    j1 = next(j for j in right if all(_det2(cols[t], cols[j]) >= 0 for t in right))
    C1, C2 = cols[j1], cols[j2]
    det = _det2(C1, C2)
    if det != 1:
        raise NotNormalizableError(f"chamber walls have determinant {det}")
    # inverse of [C1 C2]
    A = ((C2[1], -C2[0]), (-C1[1], C1[0]))
    new = [(A[0][0] * c[0] + A[0][1] * c[1], A[1][0] * c[0] + A[1][1] * c[1]) for c in cols]
    e1 = [j for j, c in enumerate(new) if c == (1, 0)]
    e2 = [j for j, c in enumerate(new) if c == (0, 1)]
    x_type = [j for j, c in enumerate(new) if c[0] == 1 and c[1] < 0]
    y_type = [j for j, c in enumerate(new) if c[1] == 1 and c[0] < 0]
    if len(e1) + len(e2) + len(x_type) + len(y_type) != len(new) or (x_type and y_type):
        raise NotNormalizableError("column types do not fit the projectivised-bundle pattern")
    if x_type or (not y_type and len(e2) > len(e1)):
        # row swap; without twisted columns it picks the larger N as canonical
        A = (A[1], A[0])
        e1, e2 = e2, e1
        y_type = x_type
        new = [(c[1], c[0]) for c in new]
    twists = sorted(((-new[j][0], j) for j in y_type), reverse=True)
    extra = e2[1:]
    a = tuple(t for t, _ in twists) + (0,) * len(extra)
    order = tuple(e1) + (e2[0],) + tuple(j for _, j in twists) + tuple(extra)
    return Normalization(RankTwoModel(len(e1), a), (tuple(A[0]), tuple(A[1])), order)


def normalize_rank2(data: MomentData) -> RankTwoModel:
    return normalize_rank2_detailed(data).model


def normalize(data: MomentData) -> RankTwoModel:
    """Normal form for rank 1 (projective space) or rank 2."""
    if data.r == 2:
        return normalize_rank2(data)
    if data.r != 1:
        raise UnsupportedRankError(f"rank {data.r} is not supported")
    report = validate(data)
    sign = data.chamber_rays()[0][0]
    if not (report.compact and report.smooth) or any(c[0] * sign <= 0 or abs(c[0]) != 1 for c in data.columns):
        raise NotNormalizableError(f"rank-1 data is not projective space: {report.failure_witness}")
    return RankTwoModel(data.n, (), rank=1)


# --- loading ---------------------------------------------------------------

def parse_family(text: str) -> RankTwoModel:
    """Parse ``"N=2,a=1,0"`` (rank 2) or ``"N=3,rank=1"``."""
    fields: dict[str, list[str]] = {}
    key = None
    for token in filter(None, (t.strip() for t in text.split(","))):
        if "=" in token:
            key, value = (s.strip() for s in token.split("=", 1))
            fields[key] = [value] if value else []
        elif key is not None:
            fields[key].append(token)
        else:
            raise ConfigError(f"cannot parse family {text!r}")
    try:
        N = int(fields.pop("N")[0])
        rank = int(fields.pop("rank", ["2"])[0])
        a = [int(x) for x in fields.pop("a", [])]
    except (KeyError, IndexError, ValueError) as exc:
        raise ConfigError(f"cannot parse family {text!r}") from exc
    if fields:
        raise ConfigError(f"unknown family keys {sorted(fields)}")
    return RankTwoModel(N, tuple(a), rank)


def data_from_mapping(doc: Mapping) -> tuple[MomentData, RankTwoModel | None]:
    """Raw weight data from a parsed model file; the model is set only for ``family`` entries."""
    chamber = doc.get("chamber", "positive_orthant")
    if chamber != "positive_orthant":
        raise ConfigError(f"unsupported chamber {chamber!r}")
    if "family" in doc:
        fam = doc["family"]
        model = RankTwoModel(int(fam["N"]), tuple(fam.get("a", ())), int(fam.get("rank", 2)))
        return model.moment_data(), model
    if "matrix" in doc:
        return MomentData(tuple(tuple(row) for row in doc["matrix"])), None
    raise ConfigError("model file needs `matrix` or `family`")


def model_from_mapping(doc: Mapping) -> tuple[RankTwoModel, MomentData]:
    data, model = data_from_mapping(doc)
    return (model or normalize(data)), data


def _read_toml(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            return _toml.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read model file {path}: {exc}") from exc
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML in {path}: {exc}") from exc


def load_model_file(path: str) -> tuple[RankTwoModel, MomentData]:
    return model_from_mapping(_read_toml(path))


def load_data_file(path: str) -> MomentData:
    """Weight data as written, without normalizing (so invalid data can still be validated)."""
    return data_from_mapping(_read_toml(path))[0]


# --- integration -----------------------------------------------------------

def _complete_homogeneous(a: Sequence[int], top: int) -> list[int]:
    """Coefficients h_0..h_top of prod_j 1/(1 - a_j t), i.e. the expansion of
    prod_j 1/(y - a_j x) in powers of x/y."""
    h = [1] + [0] * top
    for aj in a:
        for m in range(1, top + 1):
            h[m] += aj * h[m - 1]
    return h


def residue_monomial(model: RankTwoModel, exps: Sequence[int]) -> int:
    """Iterated residue of a single monomial ``p1^e1 p2^e2`` (or ``p^e``)."""
    if model.rank == 1:
        return 1 if exps[0] == model.N - 1 else 0
    e1, e2 = exps
    # x-exponent of x^e1 * x^m / x^N must be -1, y-exponent of y^e2 / y^(1+k+m) must be -1
    m = model.N - 1 - e1
    if m < 0 or e2 != model.k + m:
        return 0
    return _complete_homogeneous(model.a, m)[m]


def integrate(model: RankTwoModel, element) -> Fraction:
    """Integral over the model by iterated residues.

    ``element`` is an :class:`~qkmirror.algebra.AlgebraElement` or a polynomial
    given as ``{exponent tuple: coefficient}`` (not necessarily reduced).
    """
    if hasattr(element, "algebra"):
        poly = element.to_poly()
    else:
        poly = element
    total = 0
    for exps, c in poly.items():
        if c:
            total += c * residue_monomial(model, exps)
    return total if not isinstance(total, int) else Fraction(total)


def pairing_matrix(model: RankTwoModel) -> list[list[Fraction]]:
    """Poincare pairing of the monomial basis."""
    from .algebra import monomial_basis

    basis = monomial_basis(model)
    return [[Fraction(residue_monomial(model, tuple(x + y for x, y in zip(u, v)))) for v in basis] for u in basis]


def euler_pairing(model: RankTwoModel, E, F) -> Fraction:
    """``chi(E (x) F) = int ch(E) ch(F) Td(TX)`` for Laurent words (or K-combinations)."""
    from .algebra import build_algebra, char_class, chern_character

    alg = build_algebra(model, "exact")
    value = integrate(model, chern_character(alg, E) * chern_character(alg, F) * char_class(alg, "todd"))
    return Fraction(value)
