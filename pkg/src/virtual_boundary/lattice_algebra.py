"""Exact lattices over Q and Q(sqrt 2).

Coordinates are :class:`Scalar` values ``a + b*sqrt(2)`` with rational ``a``
and ``b``.  A lattice is a finitely generated Z-submodule of ``Scalar**d``; all
Z-module work happens after the injective doubling map
``(a1 + b1 r, ..., ad + bd r) -> (a1, b1, ..., ad, bd)`` into ``Q**(2d)``,
where the canonical form is the Hermite normal form of the row lattice.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, sqrt
from typing import Iterable, Sequence

__all__ = [
    "Scalar",
    "SQRT2",
    "Lattice",
    "IndexResult",
    "DimensionMismatch",
    "canonicalize",
    "intersect",
    "lattice_sum",
    "index",
    "is_commensurable",
    "kernel_sublattice",
    "integer_kernel",
    "vec",
    "dot",
]


class DimensionMismatch(ValueError):
    pass


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot make an exact rational from {x!r}")


@dataclass(frozen=True, order=False)
class Scalar:
    """The real number ``a + b*sqrt(2)`` with rational ``a`` and ``b``."""

    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "a", _frac(self.a))
        object.__setattr__(self, "b", _frac(self.b))

    @classmethod
    def of(cls, x) -> "Scalar":
        if isinstance(x, Scalar):
            return x
        return cls(_frac(x), Fraction(0))

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return Scalar(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return Scalar(-self.a, -self.b)

    def __sub__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return Scalar(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return Scalar(self.a * o.a + 2 * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        """Field norm ``a^2 - 2 b^2``."""
        return self.a * self.a - 2 * self.b * self.b

    def conjugate(self) -> "Scalar":
        return Scalar(self.a, -self.b)

    def inverse(self) -> "Scalar":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("Scalar division by zero")
        return Scalar(self.a / n, -self.b / n)

    def __truediv__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        out = ONE
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # order ----------------------------------------------------------------
    def sign(self) -> int:
        a, b = self.a, self.b
        sa = (a > 0) - (a < 0)
        sb = (b > 0) - (b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 with 2 b^2
        d = a * a - 2 * b * b
        sd = (d > 0) - (d < 0)
        return sa * sd

    def __lt__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return (self - o).sign() < 0

    def __le__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return (self - o).sign() <= 0

    def __gt__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return (self - o).sign() > 0

    def __ge__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return (self - o).sign() >= 0

    def __eq__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return False
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __float__(self):
        return float(self.a) + float(self.b) * sqrt(2.0)

    def is_rational(self) -> bool:
        return self.b == 0

    def __repr__(self):
        if self.b == 0:
            return f"Scalar({self.a})"
        return f"Scalar({self.a} + {self.b}*sqrt2)"

    # serialization ----------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "a_num": self.a.numerator,
            "a_den": self.a.denominator,
            "b_num": self.b.numerator,
            "b_den": self.b.denominator,
        }

    @classmethod
    def from_json(cls, d: dict) -> "Scalar":
        return cls(Fraction(d["a_num"], d["a_den"]), Fraction(d["b_num"], d["b_den"]))


def _coerce(x):
    if isinstance(x, Scalar):
        return x
    if isinstance(x, (int, Fraction)):
        return Scalar(Fraction(x), Fraction(0))
    return NotImplemented


ZERO = Scalar(0, 0)
ONE = Scalar(1, 0)
SQRT2 = Scalar(0, 1)


def vec(*xs) -> tuple[Scalar, ...]:
    """Build a Scalar vector from ints, Fractions or Scalars."""
    return tuple(Scalar.of(x) for x in xs)


def dot(u: Sequence[Scalar], v: Sequence[Scalar]) -> Scalar:
    if len(u) != len(v):
        raise DimensionMismatch(f"{len(u)} != {len(v)}")
    return reduce(lambda acc, p: acc + p[0] * p[1], zip(u, v), ZERO)


# --------------------------------------------------------------------------
# integer linear algebra
# --------------------------------------------------------------------------


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with x*a + y*b = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def _hnf(rows: list[list[int]], track: bool = False):
    """Row Hermite normal form.

    Returns ``(H, U, rank)`` with ``U @ rows == H`` and ``U`` unimodular; the
    first ``rank`` rows of ``H`` are the echelon basis, with positive pivots
    and entries above each pivot reduced into ``[0, pivot)``.
    """
    A = [list(r) for r in rows]
    m = len(A)
    n = len(A[0]) if m else 0
    U = [[int(i == j) for j in range(m)] for i in range(m)] if track else None
    p = 0
    pivots = []
    for col in range(n):
        if p >= m:
            break
        for i in range(p + 1, m):
            b = A[i][col]
            if b == 0:
                continue
            a = A[p][col]
            g, x, y = _xgcd(a, b)
            ag, bg = a // g, b // g
            rp, ri = A[p], A[i]
            A[p] = [x * u + y * v for u, v in zip(rp, ri)]
            A[i] = [-bg * u + ag * v for u, v in zip(rp, ri)]
            if track:
                up, ui = U[p], U[i]
                U[p] = [x * u + y * v for u, v in zip(up, ui)]
                U[i] = [-bg * u + ag * v for u, v in zip(up, ui)]
        piv = A[p][col]
        if piv == 0:
            continue
        if piv < 0:
            A[p] = [-u for u in A[p]]
            if track:
                U[p] = [-u for u in U[p]]
            piv = -piv
        for r in range(p):
            q = A[r][col] // piv
            if q:
                A[r] = [u - q * v for u, v in zip(A[r], A[p])]
                if track:
                    U[r] = [u - q * v for u, v in zip(U[r], U[p])]
        pivots.append(col)
        p += 1
    return A, U, p


def _common_denominator(rows: Iterable[Sequence[Fraction]]) -> int:
    d = 1
    for r in rows:
        for x in r:
            d = d * x.denominator // gcd(d, x.denominator)
    return d


def integer_kernel(rows: Sequence[Sequence[Fraction]]) -> list[list[int]]:
    """Basis of ``{c in Z^m : sum_i c_i rows[i] = 0}``."""
    m = len(rows)
    if m == 0:
        return []
    rows = [[_frac(x) for x in r] for r in rows]
    if not rows[0]:
        return [[int(i == j) for j in range(m)] for i in range(m)]
    d = _common_denominator(rows)
    ints = [[int(x * d) for x in r] for r in rows]
    H, U, rank = _hnf(ints, track=True)
    return [U[i] for i in range(rank, m)]


def _det(mat: list[list[Fraction]]) -> Fraction:
    a = [[Fraction(x) for x in r] for r in mat]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            if f:
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return det


# --------------------------------------------------------------------------
# lattices
# --------------------------------------------------------------------------


def _double(v: Sequence[Scalar]) -> list[Fraction]:
    out: list[Fraction] = []
    for x in v:
        out.append(x.a)
        out.append(x.b)
    return out


def _undouble(row: Sequence[Fraction]) -> tuple[Scalar, ...]:
    return tuple(Scalar(row[2 * i], row[2 * i + 1]) for i in range(len(row) // 2))


class IndexResult(enum.Enum):
    INFINITE = "INFINITE"
    NOT_SUBLATTICE = "NOT_SUBLATTICE"


@dataclass(frozen=True)
class Lattice:
    """A Z-module in ``Scalar**ambient_dim`` stored in canonical (HNF) form.

    Build instances with :func:`canonicalize`; the constructor trusts its
    input.
    """

    ambient_dim: int
    basis: tuple[tuple[Scalar, ...], ...]

    @property
    def rank(self) -> int:
        return len(self.basis)

    @classmethod
    def zero(cls, ambient_dim: int) -> "Lattice":
        return cls(ambient_dim, ())

    @classmethod
    def standard(cls, ambient_dim: int) -> "Lattice":
        return canonicalize(
            [tuple(ONE if i == j else ZERO for j in range(ambient_dim)) for i in range(ambient_dim)]
        )

    def _rows(self) -> list[list[Fraction]]:
        return [_double(b) for b in self.basis]

    def coefficients(self, v: Sequence[Scalar]) -> list[int] | None:
        """Integer coordinates of ``v`` in the canonical basis, or None."""
        if len(v) != self.ambient_dim:
            raise DimensionMismatch(f"vector of length {len(v)} in dimension {self.ambient_dim}")
        w = _double([Scalar.of(x) for x in v])
        coeffs = []
        for row in self._rows():
            col = next(i for i, x in enumerate(row) if x != 0)
            q = w[col] / row[col]
            if q.denominator != 1:
                return None
            q = int(q)
            coeffs.append(q)
            if q:
                w = [x - q * y for x, y in zip(w, row)]
        if any(w):
            return None
        return coeffs

    def __contains__(self, v) -> bool:
        return self.coefficients(v) is not None

    def is_sublattice_of(self, other: "Lattice") -> bool:
        _check_dims(self, other)
        return all(b in other for b in self.basis)

    def to_json(self) -> dict:
        return {
            "ambient_dim": self.ambient_dim,
            "basis": [[x.to_json() for x in b] for b in self.basis],
        }

    @classmethod
    def from_json(cls, d: dict) -> "Lattice":
        vecs = [tuple(Scalar.from_json(x) for x in b) for b in d["basis"]]
        return canonicalize(vecs, ambient_dim=d["ambient_dim"])

    def __repr__(self):
        inner = ", ".join("(" + ", ".join(_fmt(x) for x in b) + ")" for b in self.basis)
        return f"Lattice(dim={self.ambient_dim}, rank={self.rank}, [{inner}])"


def _fmt(x: Scalar) -> str:
    if x.b == 0:
        return str(x.a)
    if x.a == 0:
        return f"{x.b}r2"
    return f"{x.a}+{x.b}r2"


def _check_dims(A: Lattice, B: Lattice) -> None:
    if A.ambient_dim != B.ambient_dim:
        raise DimensionMismatch(f"ambient dimensions {A.ambient_dim} and {B.ambient_dim}")


def canonicalize(vectors: Iterable[Sequence], ambient_dim: int | None = None) -> Lattice:
    """Z-span of ``vectors`` in canonical form."""
    vs = [tuple(Scalar.of(x) for x in v) for v in vectors]
    dims = {len(v) for v in vs}
    if ambient_dim is not None:
        dims.add(ambient_dim)
    if len(dims) > 1:
        raise DimensionMismatch(f"vectors of lengths {sorted(dims)}")
    if not dims:
        raise DimensionMismatch("ambient dimension unknown for an empty family")
    d = dims.pop()
    rows = [_double(v) for v in vs if any(v)]
    if not rows:
        return Lattice(d, ())
    den = _common_denominator(rows)
    ints = [[int(x * den) for x in r] for r in rows]
    H, _, rank = _hnf(ints)
    basis = tuple(_undouble([Fraction(x, den) for x in H[i]]) for i in range(rank))
    return Lattice(d, basis)


def lattice_sum(A: Lattice, B: Lattice) -> Lattice:
    _check_dims(A, B)
    return canonicalize(A.basis + B.basis, ambient_dim=A.ambient_dim)


def intersect(A: Lattice, B: Lattice) -> Lattice:
    _check_dims(A, B)
    if A.rank == 0 or B.rank == 0:
        return Lattice.zero(A.ambient_dim)
    rows = A._rows() + [[-x for x in r] for r in B._rows()]
    kern = integer_kernel(rows)
    out = []
    for k in kern:
        u = k[: A.rank]
        v = [ZERO] * A.ambient_dim
        for c, b in zip(u, A.basis):
            if c:
                v = [x + c * y for x, y in zip(v, b)]
        out.append(tuple(v))
    return canonicalize(out, ambient_dim=A.ambient_dim)


def index(A: Lattice, B: Lattice):
    """``[B : A]`` when ``A`` is a full-rank sublattice of ``B``.

    Returns :attr:`IndexResult.INFINITE` for a proper-rank sublattice and
    :attr:`IndexResult.NOT_SUBLATTICE` when ``A`` is not contained in ``B``.
    """
    _check_dims(A, B)
    coeffs = []
    for b in A.basis:
        c = B.coefficients(b)
        if c is None:
            return IndexResult.NOT_SUBLATTICE
        coeffs.append(c)
    if A.rank < B.rank:
        return IndexResult.INFINITE
    if A.rank == 0:
        return 1
    return abs(int(_det(coeffs)))


def is_commensurable(A: Lattice, B: Lattice) -> bool:
    _check_dims(A, B)
    return A.rank == B.rank == intersect(A, B).rank


def kernel_sublattice(L: Lattice, matrix: Sequence[Sequence]) -> Lattice:
    """``{x in L : matrix @ x = 0}`` for a Scalar matrix acting on coordinates."""
    mat = [[Scalar.of(x) for x in r] for r in matrix]
    for r in mat:
        if len(r) != L.ambient_dim:
            raise DimensionMismatch("matrix width differs from ambient dimension")
    if L.rank == 0:
        return L
    if not mat:
        return L
    rows = [_double([dot(r, b) for r in mat]) for b in L.basis]
    kern = integer_kernel(rows)
    out = []
    for k in kern:
        v = [ZERO] * L.ambient_dim
        for c, b in zip(k, L.basis):
            if c:
                v = [x + c * y for x, y in zip(v, b)]
        out.append(tuple(v))
    return canonicalize(out, ambient_dim=L.ambient_dim)
