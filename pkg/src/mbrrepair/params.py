"""System parameters, encoding vectors and the symmetric message matrix."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .field import GF256, Field, Matrix, mat_rank, vandermonde


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class SystemParams:
    """An (n, k, d) MBR configuration with ``beta`` symbols per helper.

    ``alpha`` is the per-node storage and ``B`` the message size, both in
    field symbols per stripe.  A stripe with ``beta > 1`` is ``beta``
    independent copies ("units") of the ``beta = 1`` code.
    """

    n: int
    k: int
    d: int
    field: Field = GF256
    beta: int = 1

    @property
    def alpha(self) -> int:
        return self.d * self.beta

    @property
    def unit_size(self) -> int:
        """Message symbols carried by one ``beta = 1`` unit."""
        return self.k * self.d - self.k * (self.k - 1) // 2

    @property
    def B(self) -> int:
        return self.beta * self.unit_size

    @property
    def q(self) -> int:
        return self.field.q

    def unit(self) -> "SystemParams":
        return SystemParams(self.n, self.k, self.d, self.field, 1)


def make_params(n: int, k: int, d: int, field: Field = GF256, beta: int = 1) -> SystemParams:
    for name, v in (("n", n), ("k", k), ("d", d), ("beta", beta)):
        if not isinstance(v, (int, np.integer)) or isinstance(v, bool):
            raise ParameterError(f"{name} must be an integer, got {v!r}")
    if beta < 1:
        raise ParameterError(f"beta must be positive, got {beta}")
    if not 1 <= k <= d < n:
        raise ParameterError(f"need 1 <= k <= d < n, got n={n} k={k} d={d}")
    if field.q < n:
        raise ParameterError(f"field size {field.q} is smaller than n={n}")
    return SystemParams(int(n), int(k), int(d), field, int(beta))


@dataclass(frozen=True)
class EncodingVectors:
    """Row ``i-1`` of ``psi`` is the encoding vector of node ``i``."""

    psi: Matrix
    points: tuple[int, ...]

    def vector(self, node: int) -> np.ndarray:
        return self.psi.a[node - 1]

    def columns(self, nodes) -> Matrix:
        """The d x len(nodes) matrix whose columns are the nodes' vectors."""
        return Matrix(self.psi.field, self.psi.a[[i - 1 for i in nodes]].T)

    def rows(self, nodes) -> Matrix:
        return Matrix(self.psi.field, self.psi.a[[i - 1 for i in nodes]])

    @cached_property
    def n(self) -> int:
        return self.psi.rows


def _subsets(n: int, size: int, limit: int = 5000, seed: int = 0):
    total = 1
    for i in range(size):
        total = total * (n - i) // (i + 1)
    if total <= limit:
        yield from itertools.combinations(range(n), size)
        return
    rng = np.random.default_rng(seed)
    for _ in range(limit):
        yield tuple(sorted(rng.choice(n, size=size, replace=False).tolist()))


def check_encoding_vectors(psi: Matrix, k: int) -> None:
    """Raise unless every d rows are independent and every k rows are
    independent on their first k coordinates.

    Exhaustive while the number of subsets is small, sampled otherwise.
    """
    n, d = psi.shape
    for rows in _subsets(n, d):
        if mat_rank(Matrix(psi.field, psi.a[list(rows)])) != d:
            raise ParameterError(f"encoding vectors of nodes {[r + 1 for r in rows]} are dependent")
    for rows in _subsets(n, k):
        if mat_rank(Matrix(psi.field, psi.a[list(rows), :k])) != k:
            raise ParameterError(
                f"encoding vectors of nodes {[r + 1 for r in rows]} are dependent on the first {k} coordinates"
            )


def build_encoding_vectors(params: SystemParams) -> EncodingVectors:
    """Vandermonde vectors at the points ``i mod q`` for node ``i``.

    The points are distinct because ``n <= q``; node ``q`` (if present) gets
    the point 0, whose vector is the first unit vector.
    """
    if params.q < params.n:
        raise ParameterError(f"field of size {params.q} cannot supply {params.n} distinct points")
    points = tuple(i % params.q for i in range(1, params.n + 1))
    psi = vandermonde(params.field, points, params.d)
    check_encoding_vectors(psi, params.k)
    return EncodingVectors(psi, points)


@dataclass(frozen=True)
class MessageMatrix:
    """The d x d matrix ``[[S, R], [R^T, 0]]`` with S symmetric k x k."""

    m: Matrix
    k: int

    @property
    def d(self) -> int:
        return self.m.rows


def message_positions(k: int, d: int) -> list[tuple[int, int]]:
    """Zero-based (row, col) of each free entry, in fill order.

    Upper triangle of S row by row, then R row by row.
    """
    pos = [(i, j) for i in range(k) for j in range(i, k)]
    pos += [(i, j) for i in range(k) for j in range(k, d)]
    return pos


def _check_length(symbols, params: SystemParams) -> np.ndarray:
    x = np.asarray(symbols, dtype=np.int64)
    if x.shape[-1] != params.unit_size:
        raise ParameterError(f"message needs {params.unit_size} symbols per unit, got {x.shape[-1]}")
    if x.size and (x.min() < 0 or x.max() >= params.q):
        raise ParameterError(f"message symbols out of range for {params.field}")
    return x


def build_message_stack(units: np.ndarray, params: SystemParams) -> np.ndarray:
    """Vectorised :func:`build_message_matrix`: (U, B/beta) -> (U, d, d)."""
    units = _check_length(units, params)
    units = units.reshape(-1, params.unit_size)
    rows, cols = np.array(message_positions(params.k, params.d)).T
    m = np.zeros((units.shape[0], params.d, params.d), dtype=np.int64)
    m[:, rows, cols] = units
    m[:, cols, rows] = units
    return m


def flatten_message_stack(m: np.ndarray, params: SystemParams) -> np.ndarray:
    rows, cols = np.array(message_positions(params.k, params.d)).T
    return m[:, rows, cols]


def build_message_matrix(message, params: SystemParams) -> MessageMatrix:
    x = _check_length(message, params)
    if x.ndim != 1:
        raise ParameterError("build_message_matrix takes a single unit message")
    return MessageMatrix(Matrix(params.field, build_message_stack(x, params)[0]), params.k)


def flatten_message_matrix(mm: MessageMatrix, params: SystemParams) -> np.ndarray:
    a = mm.m.a
    k, d = params.k, params.d
    if a.shape != (d, d):
        raise ParameterError(f"expected a {d}x{d} matrix, got {a.shape}")
    if not np.array_equal(a, a.T):
        raise ParameterError("message matrix is not symmetric")
    if np.any(a[k:, k:]):
        raise ParameterError("lower-right block of the message matrix is not zero")
    return flatten_message_stack(a[None], params)[0]
