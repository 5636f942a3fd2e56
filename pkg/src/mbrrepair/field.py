"""Exact finite-field arithmetic and small dense matrices.

Two field families are supported: prime fields GF(p) and binary extension
fields GF(2^m) (m <= 16) given by an irreducible reduction polynomial.
Elements are plain integers in ``[0, q)``; the ``Field`` object carries the
arithmetic.  All array operations accept numpy integer arrays so that many
stripes can be processed at once, but every result is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

GF256_POLY = 0x11D


class FieldError(ValueError):
    pass


class FieldMismatchError(FieldError):
    pass


class SingularMatrixError(ArithmeticError):
    pass


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def next_prime(x: int) -> int:
    while not is_prime(x):
        x += 1
    return x


def _clmul_mod(a: int, b: int, poly: int, m: int) -> int:
    r = 0
    top = 1 << m
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= poly
    return r


def _poly_mod(a: int, b: int) -> int:
    db = b.bit_length()
    while a and a.bit_length() >= db:
        a ^= b << (a.bit_length() - db)
    return a


def is_irreducible(poly: int) -> bool:
    """Irreducibility of a GF(2) polynomial by trial division."""
    deg = poly.bit_length() - 1
    if deg < 1:
        return False
    for div in range(2, 1 << (deg // 2 + 1)):
        if div.bit_length() - 1 > deg // 2:
            break
        if _poly_mod(poly, div) == 0:
            return False
    return True


class Field:
    """A finite field GF(q).

    Use :meth:`prime` or :meth:`binary` to construct one.  Instances compare
    equal when they describe the same field, so they can be used as dict keys.
    """

    def __init__(self, kind: str, q: int, p: int = 2, m: int = 1, poly: int = 0):
        self.kind = kind
        self.q = q
        self.p = p
        self.m = m
        self.poly = poly
        if kind == "binary":
            self._build_tables()

    @classmethod
    def prime(cls, p: int) -> "Field":
        if not is_prime(p):
            raise FieldError(f"{p} is not prime")
        if p > 1 << 16:
            raise FieldError("fields larger than 2^16 are not supported")
        return cls("prime", p, p=p)

    @classmethod
    def binary(cls, m: int = 8, poly: int = GF256_POLY) -> "Field":
        if not 1 <= m <= 16:
            raise FieldError("binary extension degree must be in 1..16")
        if poly.bit_length() - 1 != m:
            raise FieldError(f"reduction polynomial {poly:#x} does not have degree {m}")
        if not is_irreducible(poly):
            raise FieldError(f"reduction polynomial {poly:#x} is reducible")
        return cls("binary", 1 << m, m=m, poly=poly)

    def _build_tables(self) -> None:
        q, m, poly = self.q, self.m, self.poly
        # x is not necessarily primitive for an arbitrary irreducible poly
        gen = None
        for g in range(2, q) if q > 2 else [1]:
            x, order = 1, 0
            while True:
                x = _clmul_mod(x, g, poly, m)
                order += 1
                if x == 1:
                    break
            if order == q - 1:
                gen = g
                break
        exp = np.zeros(2 * (q - 1), dtype=np.int64)
        log = np.full(q, -1, dtype=np.int64)
        x = 1
        for i in range(q - 1):
            exp[i] = x
            log[x] = i
            x = _clmul_mod(x, gen, poly, m)
        exp[q - 1:] = exp[: q - 1]
        self.generator = gen
        self.exp = exp
        self.log = log

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Field) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    @cached_property
    def _key(self) -> tuple:
        return (self.kind, self.q, self.poly)

    def __repr__(self) -> str:
        if self.kind == "prime":
            return f"GF({self.q})"
        return f"GF(2^{self.m}, poly={self.poly:#x})"

    @property
    def name(self) -> str:
        if self.kind == "prime":
            return str(self.q)
        if self.m == 8 and self.poly == GF256_POLY:
            return "gf256"
        return f"gf2^{self.m}:{self.poly:#x}"

    # element-wise arithmetic; scalars and numpy arrays both work

    def add(self, a, b):
        if self.kind == "binary":
            return np.bitwise_xor(a, b)
        return (np.asarray(a, dtype=np.int64) + b) % self.q

    def sub(self, a, b):
        if self.kind == "binary":
            return np.bitwise_xor(a, b)
        return (np.asarray(a, dtype=np.int64) - b) % self.q

    def neg(self, a):
        if self.kind == "binary":
            return np.asarray(a, dtype=np.int64)
        return (-np.asarray(a, dtype=np.int64)) % self.q

    def mul(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.kind == "prime":
            return (a * b) % self.q
        la, lb = self.log[a], self.log[b]
        out = self.exp[np.where((la < 0) | (lb < 0), 0, la + lb)]
        return np.where((la < 0) | (lb < 0), 0, out)

    def inv(self, a):
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("zero has no inverse")
        if self.kind == "prime":
            if a.ndim == 0:
                return np.int64(pow(int(a), -1, self.q))
            return np.array([pow(int(x), -1, self.q) for x in a.ravel()], dtype=np.int64).reshape(a.shape)
        return self.exp[(self.q - 1 - self.log[a]) % (self.q - 1)]

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        r = 1
        for _ in range(e):
            r = int(self.mul(r, a))
        return r

    def element(self, value: int) -> "FieldElement":
        return FieldElement(int(value), self)

    def matmul(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Matrix product of 2-D integer arrays over the field."""
        x = np.asarray(x, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        if x.shape[1] != y.shape[0]:
            raise ValueError(f"dimension mismatch: {x.shape} x {y.shape}")
        if self.kind == "prime":
            return (x @ y) % self.q
        out = np.zeros((x.shape[0], y.shape[1]), dtype=np.int64)
        for j in range(x.shape[1]):
            out ^= self.mul(x[:, j:j + 1], y[j:j + 1, :])
        return out

    def elements(self) -> range:
        return range(self.q)


GF256 = Field.binary(8, GF256_POLY)


def parse_field(text: str) -> Field:
    """Parse a field name: ``gf256``, ``gf2^m:0xPOLY`` or a prime like ``257``."""
    t = text.strip().lower()
    if t in ("gf256", "gf2^8", "gf(256)"):
        return GF256
    if t.startswith("gf2^"):
        m_text, _, poly_text = t[4:].partition(":")
        if not poly_text:
            raise FieldError(f"binary field {text!r} needs an explicit reduction polynomial")
        return Field.binary(int(m_text), int(poly_text, 0))
    if t.startswith("gf"):
        t = t[2:].strip("()")
    try:
        p = int(t)
    except ValueError:
        raise FieldError(f"unrecognised field {text!r}") from None
    return Field.prime(p)


@dataclass(frozen=True)
class FieldElement:
    value: int
    field: Field

    def __post_init__(self):
        if not 0 <= self.value < self.field.q:
            raise FieldError(f"{self.value} is not an element of {self.field}")

    def _check(self, other: "FieldElement") -> None:
        if not isinstance(other, FieldElement):
            raise TypeError(f"expected FieldElement, got {type(other).__name__}")
        if other.field != self.field:
            raise FieldMismatchError(f"{self.field} vs {other.field}")

    def __add__(self, other):
        return field_add(self, other)

    def __sub__(self, other):
        self._check(other)
        return FieldElement(int(self.field.sub(self.value, other.value)), self.field)

    def __mul__(self, other):
        return field_mul(self, other)

    def __truediv__(self, other):
        return field_mul(self, field_inv(other))

    def __neg__(self):
        return FieldElement(int(self.field.neg(self.value)), self.field)

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.value}@{self.field!r}"


def field_add(a: FieldElement, b: FieldElement) -> FieldElement:
    a._check(b)
    return FieldElement(int(a.field.add(a.value, b.value)), a.field)


def field_mul(a: FieldElement, b: FieldElement) -> FieldElement:
    a._check(b)
    return FieldElement(int(a.field.mul(a.value, b.value)), a.field)


def field_inv(a: FieldElement) -> FieldElement:
    if a.value == 0:
        raise ZeroDivisionError("zero has no inverse")
    return FieldElement(int(a.field.inv(a.value)), a.field)


class Matrix:
    """Dense matrix over a finite field, backed by a read-only int64 array."""

    __slots__ = ("field", "a")

    def __init__(self, field: Field, entries):
        a = np.array(entries, dtype=np.int64)
        if a.ndim == 1:
            a = a.reshape(1, -1) if a.size else a.reshape(0, 0)
        if a.ndim != 2:
            raise ValueError("matrix entries must be two-dimensional")
        if a.size and (a.min() < 0 or a.max() >= field.q):
            raise FieldError(f"entries out of range for {field}")
        a.setflags(write=False)
        self.field = field
        self.a = a

    @classmethod
    def identity(cls, field: Field, size: int) -> "Matrix":
        return cls(field, np.eye(size, dtype=np.int64))

    @classmethod
    def zeros(cls, field: Field, rows: int, cols: int) -> "Matrix":
        return cls(field, np.zeros((rows, cols), dtype=np.int64))

    @property
    def rows(self) -> int:
        return self.a.shape[0]

    @property
    def cols(self) -> int:
        return self.a.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.a.shape

    @property
    def T(self) -> "Matrix":
        return Matrix(self.field, self.a.T)

    def __getitem__(self, idx):
        return self.a[idx]

    def __eq__(self, other):
        return (
            isinstance(other, Matrix)
            and self.field == other.field
            and self.a.shape == other.a.shape
            and bool(np.array_equal(self.a, other.a))
        )

    def __hash__(self):
        return hash((self.field, self.a.shape, self.a.tobytes()))

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return mat_mul(self, other)

    def tolist(self) -> list[list[int]]:
        return self.a.tolist()

    def __repr__(self):
        return f"Matrix({self.field!r}, {self.a.tolist()})"


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    if a.field != b.field:
        raise FieldMismatchError(f"{a.field} vs {b.field}")
    if a.cols != b.rows:
        raise ValueError(f"dimension mismatch: {a.shape} x {b.shape}")
    return Matrix(a.field, a.field.matmul(a.a, b.a))


def _row_reduce(field: Field, work: np.ndarray, ncols: int) -> list[int]:
    """Reduced row echelon form in place on the first ``ncols`` columns.

    Returns the pivot columns.  Pivot choice is the first nonzero entry.
    """
    pivots = []
    r = 0
    rows = work.shape[0]
    for c in range(ncols):
        if r == rows:
            break
        nz = np.nonzero(work[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            work[[r, p]] = work[[p, r]]
        work[r] = field.mul(work[r], field.inv(work[r, c]))
        for i in range(rows):
            if i != r and work[i, c]:
                work[i] = field.sub(work[i], field.mul(work[i, c], work[r]))
        pivots.append(c)
        r += 1
    return pivots


def mat_rank(a: Matrix) -> int:
    work = a.a.copy()
    return len(_row_reduce(a.field, work, a.cols))


def mat_solve(a: Matrix, rhs: Matrix) -> Matrix:
    """Solve ``a @ x = rhs`` exactly; ``a`` must be square and invertible."""
    if a.field != rhs.field:
        raise FieldMismatchError(f"{a.field} vs {rhs.field}")
    if a.rows != a.cols:
        raise ValueError(f"coefficient matrix must be square, got {a.shape}")
    if rhs.rows != a.rows:
        raise ValueError(f"dimension mismatch: {a.shape} vs rhs {rhs.shape}")
    n = a.rows
    work = np.concatenate([a.a, rhs.a], axis=1)
    pivots = _row_reduce(a.field, work, n)
    if len(pivots) < n:
        raise SingularMatrixError(f"singular {n}x{n} matrix (rank {len(pivots)})")
    return Matrix(a.field, work[:, n:])


def mat_inverse(a: Matrix) -> Matrix:
    return mat_solve(a, Matrix.identity(a.field, a.rows))


def vandermonde(field: Field, points, width: int) -> Matrix:
    """Rows ``(1, x, x^2, ..., x^(width-1))`` for each point ``x``."""
    rows = []
    for x in points:
        row, v = [], 1
        for _ in range(width):
            row.append(v)
            v = int(field.mul(v, x))
        rows.append(row)
    return Matrix(field, np.array(rows, dtype=np.int64).reshape(len(rows), width))


def mat_solve_any(a: Matrix, rhs: Matrix) -> Matrix:
    """Some ``x`` with ``a @ x = rhs`` for a possibly non-square ``a``.

    Free variables are set to zero.  Raises :class:`SingularMatrixError`
    when the system is inconsistent.
    """
    if a.field != rhs.field:
        raise FieldMismatchError(f"{a.field} vs {rhs.field}")
    if rhs.rows != a.rows:
        raise ValueError(f"dimension mismatch: {a.shape} vs rhs {rhs.shape}")
    work = np.concatenate([a.a, rhs.a], axis=1)
    pivots = _row_reduce(a.field, work, a.cols)
    if np.any(work[len(pivots):, a.cols:]):
        raise SingularMatrixError("right-hand side is not in the column space")
    x = np.zeros((a.cols, rhs.cols), dtype=np.int64)
    for r, c in enumerate(pivots):
        x[c] = work[r, a.cols:]
    return Matrix(a.field, x)
