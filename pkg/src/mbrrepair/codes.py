"""The four code variants and their encoders.

Every variant except the complete-graph code stores, at node ``i`` and per
unit stripe, the row vector ``psi_i^T M phi_i`` where ``phi_i`` is an
invertible d x d matrix (the node transform):

* ``baseline``: ``phi_i = I``
* ``c1``: ``phi_i = [psi_1 ... psi_d]`` for every node, so the j-th stored
  symbol of node i is ``psi_i^T M psi_j``
* ``c2``: ``phi_i = [psi_{i+1} ... psi_{i+d}]`` with cyclic node indices

The complete-graph code (only for d = n-1) places one MDS-coded symbol on
every edge {i, j} of the complete graph on the n nodes.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .field import Matrix, SingularMatrixError, mat_inverse, mat_rank, vandermonde
from .params import (
    EncodingVectors,
    MessageMatrix,
    ParameterError,
    SystemParams,
    build_message_stack,
)


class Variant(str, enum.Enum):
    BASELINE = "baseline"
    C1 = "c1"
    C2 = "c2"
    COMPLETE_GRAPH = "complete-graph"

    def __str__(self) -> str:
        return self.value


VARIANT_ORDER = (Variant.BASELINE, Variant.C1, Variant.C2, Variant.COMPLETE_GRAPH)


class UnsupportedVariantError(ValueError):
    pass


def admissible_variants(params: SystemParams) -> list[Variant]:
    out = [Variant.BASELINE, Variant.C1, Variant.C2]
    if params.d == params.n - 1 and params.q >= num_edges(params.n) + 1:
        out.append(Variant.COMPLETE_GRAPH)
    return out


def cyclic_add(x: int, y: int, n: int) -> int:
    return 1 + (x - 1 + y) % n


def cyclic_sub(x: int, y: int, n: int) -> int:
    return 1 + (x - 1 - y) % n


@dataclass(frozen=True)
class NodeContent:
    """Symbols held by one node; ``symbols`` has shape (stripes, alpha)."""

    node_id: int
    variant: Variant
    symbols: np.ndarray

    @property
    def stripes(self) -> int:
        return self.symbols.shape[0]

    def units(self, params: SystemParams) -> np.ndarray:
        """View as (stripes * beta, d): one row per unit stripe."""
        return self.symbols.reshape(-1, params.alpha // params.beta)

    def __eq__(self, other):
        return (
            isinstance(other, NodeContent)
            and self.node_id == other.node_id
            and self.variant == other.variant
            and self.symbols.shape == other.symbols.shape
            and bool(np.array_equal(self.symbols, other.symbols))
        )


def content_from_units(node_id: int, variant: Variant, units: np.ndarray, params: SystemParams) -> NodeContent:
    sym = np.ascontiguousarray(units, dtype=np.int64).reshape(-1, params.alpha)
    sym.setflags(write=False)
    return NodeContent(node_id, Variant(variant), sym)


@dataclass(frozen=True)
class NodeTransform:
    node_id: int
    phi: Matrix


def node_transform(variant: Variant, node_id: int, vectors: EncodingVectors, params: SystemParams) -> NodeTransform:
    variant = Variant(variant)
    if not 1 <= node_id <= params.n:
        raise ParameterError(f"node id {node_id} out of range 1..{params.n}")
    if variant is Variant.BASELINE:
        phi = Matrix.identity(params.field, params.d)
    elif variant is Variant.C1:
        phi = vectors.columns(range(1, params.d + 1))
    elif variant is Variant.C2:
        phi = vectors.columns([cyclic_add(node_id, t, params.n) for t in range(1, params.d + 1)])
    else:
        raise UnsupportedVariantError(f"{variant} is not a transform of the baseline code")
    if mat_rank(phi) != params.d:
        raise SingularMatrixError(f"transform of node {node_id} under {variant} is singular")
    return NodeTransform(node_id, phi)


@lru_cache(maxsize=256)
def _transforms(variant: Variant, vectors: EncodingVectors, params: SystemParams):
    phis, invs = {}, {}
    for i in range(1, params.n + 1):
        t = node_transform(variant, i, vectors, params)
        phis[i] = t.phi
        invs[i] = mat_inverse(t.phi)
    return phis, invs


def phi(variant, node_id, vectors, params) -> Matrix:
    return _transforms(Variant(variant), vectors, params.unit())[0][node_id]


def phi_inverse(variant, node_id, vectors, params) -> Matrix:
    return _transforms(Variant(variant), vectors, params.unit())[1][node_id]


def _as_stack(messages, params: SystemParams) -> np.ndarray:
    if isinstance(messages, MessageMatrix):
        stack = messages.m.a[None]
    elif isinstance(messages, np.ndarray):
        stack = messages.reshape(-1, params.d, params.d)
    else:
        stack = np.stack([mm.m.a for mm in messages]) if len(messages) else np.zeros((0, params.d, params.d), np.int64)
    if stack.shape[0] % params.beta:
        raise ParameterError(f"{stack.shape[0]} message matrices do not fill stripes of beta={params.beta}")
    return stack


def encode(variant: Variant, messages, vectors: EncodingVectors, params: SystemParams) -> list[NodeContent]:
    """Node contents for one message matrix or a sequence of them.

    ``messages`` may be a single :class:`MessageMatrix` (only when beta = 1),
    a sequence of them, or an array of shape (U, d, d); every ``beta``
    consecutive matrices form one stripe.
    """
    variant = Variant(variant)
    if variant is Variant.COMPLETE_GRAPH:
        raise UnsupportedVariantError("use encode_complete_graph for the complete-graph code")
    stack = _as_stack(messages, params)
    field, d = params.field, params.d
    units = stack.shape[0]
    # M is symmetric, so psi_i^T M is (M psi_i)^T for every unit at once
    flat = stack.reshape(units * d, d)
    out = []
    for i in range(1, params.n + 1):
        row = field.matmul(flat, vectors.vector(i).reshape(d, 1)).reshape(units, d)
        if variant is not Variant.BASELINE:
            row = field.matmul(row, phi(variant, i, vectors, params).a)
        out.append(content_from_units(i, variant, row, params))
    return out


def split_units(message, params: SystemParams) -> np.ndarray:
    """Reshape stripe messages of B symbols into (U, B/beta) unit messages."""
    x = np.asarray(message, dtype=np.int64)
    if x.size % params.B:
        raise ParameterError(f"message length {x.size} is not a multiple of B={params.B}")
    return x.reshape(-1, params.unit_size)


def num_edges(n: int) -> int:
    return n * (n - 1) // 2


def edges(n: int) -> list[tuple[int, int]]:
    """Edges of the complete graph on nodes 1..n, lexicographic."""
    return list(itertools.combinations(range(1, n + 1), 2))


def incident_edges(node: int, n: int) -> list[int]:
    """Edge indices stored by ``node``, in ascending neighbour order."""
    index = {e: i for i, e in enumerate(edges(n))}
    return [index[(min(node, j), max(node, j))] for j in range(1, n + 1) if j != node]


def complete_graph_generator(params: SystemParams) -> Matrix:
    """(edges x B) generator: edge e carries f(e + 1) where f has the message as coefficients."""
    if params.d != params.n - 1:
        raise UnsupportedVariantError(f"complete-graph code needs d = n-1, got n={params.n} d={params.d}")
    nedges = num_edges(params.n)
    if params.q < nedges + 1:
        raise ParameterError(f"complete-graph code on n={params.n} needs q >= {nedges + 1}, got {params.q}")
    return vandermonde(params.field, range(1, nedges + 1), params.unit_size)


def encode_complete_graph(message, params: SystemParams) -> list[NodeContent]:
    gen = complete_graph_generator(params)
    units = split_units(message, params)
    coded = params.field.matmul(units, gen.a.T)
    return [
        content_from_units(i, Variant.COMPLETE_GRAPH, coded[:, incident_edges(i, params.n)], params)
        for i in range(1, params.n + 1)
    ]


def systematic_positions(params: SystemParams) -> list[tuple[int, int]]:
    """1-based (node, symbol index) pairs that hold the raw message under C1.

    Ordered by node, then symbol index: (i, j) for 1 <= i <= k, i <= j <= d.
    """
    return [(i, j) for i in range(1, params.k + 1) for j in range(i, params.d + 1)]


@lru_cache(maxsize=64)
def _precoding(vectors: EncodingVectors, params: SystemParams) -> tuple[Matrix, Matrix]:
    """(P, P^-1) where P maps free entries of M to the systematic values."""
    b = params.unit_size
    basis = build_message_stack(np.eye(b, dtype=np.int64), params)
    contents = encode(Variant.C1, basis, vectors, params)
    cols = []
    for (i, j) in systematic_positions(params):
        cols.append(contents[i - 1].symbols[:, j - 1])
    p = Matrix(params.field, np.array(cols, dtype=np.int64))
    try:
        pinv = mat_inverse(p)
    except SingularMatrixError as e:
        raise SingularMatrixError(f"systematic precoding map is singular: {e}") from None
    return p, pinv


def precode_units(units: np.ndarray, vectors: EncodingVectors, params: SystemParams) -> np.ndarray:
    """Free entries of M (per unit) whose C1 encoding is systematic."""
    _, pinv = _precoding(vectors, params.unit())
    return params.field.matmul(units, pinv.a.T)


def unprecode_units(free: np.ndarray, vectors: EncodingVectors, params: SystemParams) -> np.ndarray:
    p, _ = _precoding(vectors, params.unit())
    return params.field.matmul(free, p.a.T)


def precode_systematic(message, vectors: EncodingVectors, params: SystemParams) -> MessageMatrix:
    x = np.asarray(message, dtype=np.int64)
    if x.shape != (params.unit_size,):
        raise ParameterError(f"expected {params.unit_size} message symbols, got shape {x.shape}")
    free = precode_units(x[None], vectors, params)
    return MessageMatrix(Matrix(params.field, build_message_stack(free, params)[0]), params.k)


def encode_message(variant: Variant, message, vectors: EncodingVectors | None, params: SystemParams,
                   systematic: bool = False) -> list[NodeContent]:
    """Encode stripe messages of B symbols each, any variant.

    With ``systematic`` (C1 only) the message is precoded so that nodes
    1..k hold it verbatim at :func:`systematic_positions`.
    """
    variant = Variant(variant)
    if variant is Variant.COMPLETE_GRAPH:
        if systematic:
            raise UnsupportedVariantError("systematic precoding is only defined for c1")
        return encode_complete_graph(message, params)
    units = split_units(message, params)
    if systematic:
        if variant is not Variant.C1:
            raise UnsupportedVariantError("systematic precoding is only defined for c1")
        units = precode_units(units, vectors, params)
    return encode(variant, build_message_stack(units, params), vectors, params)


def node_forms(variant: Variant, vectors: EncodingVectors | None, params: SystemParams,
               systematic: bool = False) -> dict[int, Matrix]:
    """Stored symbols of each node as linear forms in the unit message.

    Returns node -> (d x B/beta) matrix; row t is the coefficient vector of
    stored symbol t + 1.
    """
    unit = params.unit()
    basis = np.eye(unit.unit_size, dtype=np.int64)
    contents = encode_message(variant, basis, vectors, unit, systematic=systematic)
    return {c.node_id: Matrix(params.field, c.symbols.T) for c in contents}
