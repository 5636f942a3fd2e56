"""Node repair and full-data decoding, with per-helper read/download metering.

Counts in :class:`RepairMetrics` are field symbols per stripe.  A helper that
computes an inner product reads all ``alpha`` of its symbols and sends
``beta``; a helper that transfers reads and sends the same ``beta`` symbols.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .codes import (
    NodeContent,
    UnsupportedVariantError,
    Variant,
    complete_graph_generator,
    content_from_units,
    cyclic_sub,
    incident_edges,
    phi,
    phi_inverse,
    unprecode_units,
)
from .field import Matrix, mat_inverse, mat_solve_any
from .params import EncodingVectors, ParameterError, SystemParams, flatten_message_stack

METRICS_FIELDS = (
    "variant",
    "failed",
    "helpers",
    "read",
    "download",
    "pure_transfer",
    "read_ratio",
    "download_ratio",
)


class RepairError(ValueError):
    pass


class TransferNotAdmissibleError(RepairError):
    pass


@dataclass(frozen=True)
class RepairMetrics:
    variant: Variant
    failed: int
    helpers: tuple[int, ...]
    symbols_read: tuple[int, ...]
    symbols_downloaded: tuple[int, ...]
    pure_transfer: bool
    beta: int

    def __post_init__(self):
        for r, dl in zip(self.symbols_read, self.symbols_downloaded):
            if dl > r:
                raise ValueError("a helper cannot send more symbols than it reads")
            if self.pure_transfer and dl != r:
                raise ValueError("pure transfer requires read == download at every helper")

    @property
    def total_read(self) -> int:
        return sum(self.symbols_read)

    @property
    def total_download(self) -> int:
        return sum(self.symbols_downloaded)

    @property
    def read_ratio(self) -> float:
        """Mean read per helper over the lower bound ``beta``."""
        return self.total_read / (len(self.helpers) * self.beta)

    @property
    def download_ratio(self) -> float:
        return self.total_download / (len(self.helpers) * self.beta)

    def to_record(self) -> dict:
        return {
            "variant": str(self.variant),
            "failed": self.failed,
            "helpers": ";".join(map(str, self.helpers)),
            "read": ";".join(map(str, self.symbols_read)),
            "download": ";".join(map(str, self.symbols_downloaded)),
            "pure_transfer": str(self.pure_transfer).lower(),
            "read_ratio": _fmt_ratio(self.read_ratio),
            "download_ratio": _fmt_ratio(self.download_ratio),
        }


def _fmt_ratio(x: float) -> str:
    return f"{x:.6g}"


@dataclass(frozen=True)
class HelperResponse:
    """What one helper sends: ``payload`` has shape (stripes, beta).

    ``indices`` lists the 1-based stored-symbol positions passed within one
    stripe for a transfer, or is ``None`` for a computed response.
    """

    helper_id: int
    payload: np.ndarray
    indices: tuple[int, ...] | None = None


def _by_id(contents) -> dict[int, NodeContent]:
    if isinstance(contents, Mapping):
        return dict(contents)
    out = {}
    for c in contents:
        if isinstance(c, tuple):
            node_id, c = c
            if node_id != c.node_id:
                raise RepairError(f"node id {node_id} does not match content of node {c.node_id}")
        if c.node_id in out:
            raise RepairError(f"duplicate node {c.node_id}")
        out[c.node_id] = c
    return out


def _check_helpers(failed: int, helpers: Iterable[int], params: SystemParams) -> tuple[int, ...]:
    helpers = tuple(int(h) for h in helpers)
    if not 1 <= failed <= params.n:
        raise RepairError(f"failed node {failed} out of range 1..{params.n}")
    if len(set(helpers)) != len(helpers):
        raise RepairError(f"duplicate helpers in {helpers}")
    if len(helpers) != params.d:
        raise RepairError(f"need exactly d={params.d} helpers, got {len(helpers)}")
    if failed in helpers:
        raise RepairError(f"failed node {failed} cannot help its own repair")
    for h in helpers:
        if not 1 <= h <= params.n:
            raise RepairError(f"helper {h} out of range 1..{params.n}")
    return helpers


def _helper_units(contents: dict[int, NodeContent], helpers, variant: Variant, params: SystemParams):
    out = []
    for h in helpers:
        if h not in contents:
            raise RepairError(f"no content supplied for helper {h}")
        c = contents[h]
        if c.variant != variant:
            raise RepairError(f"node {h} holds {c.variant} content, expected {variant}")
        out.append(c.units(params))
    return out


def _rebuild(variant, failed, helpers, payload_units: np.ndarray, vectors, params) -> NodeContent:
    """Replacement-side work shared by every product-matrix repair.

    ``payload_units[:, j]`` is ``psi_{h_j}^T M psi_failed``.  Solving the
    d x d system gives ``M psi_failed``; by symmetry that is the transpose
    of ``psi_failed^T M``, which the node transform turns into content.
    """
    psi_h = vectors.rows(helpers)
    coeff = params.field.matmul(mat_inverse(psi_h).a.T, phi(variant, failed, vectors, params).a)
    return content_from_units(failed, variant, params.field.matmul(payload_units, coeff), params)


def _stripe_payload(column_units: np.ndarray, params: SystemParams) -> np.ndarray:
    return column_units.reshape(-1, params.beta)


def compute_responses(variant, failed, helpers, contents, vectors, params) -> list[HelperResponse]:
    """Inner-product responses: helper l sends stored_l . (phi_l^-1 psi_failed)."""
    variant = Variant(variant)
    contents = _by_id(contents)
    helpers = _check_helpers(failed, helpers, params)
    units = _helper_units(contents, helpers, variant, params)
    target = vectors.vector(failed).reshape(-1, 1)
    out = []
    for h, u in zip(helpers, units):
        v = params.field.matmul(phi_inverse(variant, h, vectors, params).a, target)
        out.append(HelperResponse(h, _stripe_payload(params.field.matmul(u, v)[:, 0], params)))
    return out


def repair_compute(variant, failed: int, helpers, contents, vectors: EncodingVectors,
                   params: SystemParams) -> tuple[NodeContent, RepairMetrics]:
    variant = Variant(variant)
    if variant is Variant.COMPLETE_GRAPH:
        raise UnsupportedVariantError("the complete-graph code repairs by transfer only")
    responses = compute_responses(variant, failed, helpers, contents, vectors, params)
    helpers = tuple(r.helper_id for r in responses)
    payload = np.stack([r.payload.reshape(-1) for r in responses], axis=1)
    content = _rebuild(variant, failed, helpers, payload, vectors, params)
    d = len(helpers)
    metrics = RepairMetrics(variant, failed, helpers, (params.alpha,) * d, (params.beta,) * d, False, params.beta)
    return content, metrics


def _transfer_metrics(variant, failed, helpers, params) -> RepairMetrics:
    d = len(helpers)
    return RepairMetrics(variant, failed, tuple(helpers), (params.beta,) * d, (params.beta,) * d, True, params.beta)


def _unit_indices(position: int, params: SystemParams) -> tuple[int, ...]:
    """1-based indices within a stripe of unit-position ``position`` in each unit."""
    width = params.alpha // params.beta
    return tuple(t * width + position for t in range(params.beta))


def repair_by_transfer_c1(failed: int, helpers, contents, vectors: EncodingVectors,
                          params: SystemParams) -> tuple[NodeContent, RepairMetrics]:
    """Every helper passes its ``failed``-th stored symbol (failed <= d)."""
    contents = _by_id(contents)
    helpers = _check_helpers(failed, helpers, params)
    if failed > params.d:
        raise TransferNotAdmissibleError(
            f"c1 repairs by transfer only nodes 1..{params.d}; use the compute path for node {failed}"
        )
    units = _helper_units(contents, helpers, Variant.C1, params)
    payload = np.stack([u[:, failed - 1] for u in units], axis=1)
    content = _rebuild(Variant.C1, failed, helpers, payload, vectors, params)
    return content, _transfer_metrics(Variant.C1, failed, helpers, params)


def c1_responses(failed, helpers, contents, params) -> list[HelperResponse]:
    contents = _by_id(contents)
    return [
        HelperResponse(h, _stripe_payload(contents[h].units(params)[:, failed - 1], params),
                       _unit_indices(failed, params))
        for h in helpers
    ]


def designated_helpers(failed: int, params: SystemParams) -> tuple[int, ...]:
    """C2 helper set ``(failed - d, ..., failed - 1)`` with cyclic indices."""
    return tuple(cyclic_sub(failed, t, params.n) for t in range(params.d, 0, -1))


def repair_by_transfer_c2(failed: int, contents, vectors: EncodingVectors, params: SystemParams,
                          helpers=None) -> tuple[NodeContent, RepairMetrics]:
    """Helper ``failed - t`` passes its stored symbol at position t."""
    contents = _by_id(contents)
    want = designated_helpers(failed, params)
    if helpers is not None and set(_check_helpers(failed, helpers, params)) != set(want):
        raise TransferNotAdmissibleError(
            f"c2 repairs node {failed} by transfer only from {sorted(want)}, not {sorted(helpers)}"
        )
    units = _helper_units(contents, want, Variant.C2, params)
    cols = [u[:, params.d - j - 1] for j, u in enumerate(units)]  # want[j] = failed - (d - j)
    payload = np.stack(cols, axis=1)
    content = _rebuild(Variant.C2, failed, want, payload, vectors, params)
    return content, _transfer_metrics(Variant.C2, failed, want, params)


def repair_by_transfer_complete_graph(failed: int, contents, params: SystemParams) -> tuple[NodeContent, RepairMetrics]:
    """Each other node passes the symbol on its edge to ``failed``."""
    if params.d != params.n - 1:
        raise UnsupportedVariantError(f"complete-graph code needs d = n-1, got n={params.n} d={params.d}")
    contents = _by_id(contents)
    helpers = tuple(j for j in range(1, params.n + 1) if j != failed)
    helpers = _check_helpers(failed, helpers, params)
    units = _helper_units(contents, helpers, Variant.COMPLETE_GRAPH, params)
    cols = []
    for h, u in zip(helpers, units):
        # failed's position among h's neighbours in ascending order
        pos = failed - 1 if failed < h else failed - 2
        cols.append(u[:, pos])
    content = content_from_units(failed, Variant.COMPLETE_GRAPH, np.stack(cols, axis=1), params)
    return content, _transfer_metrics(Variant.COMPLETE_GRAPH, failed, helpers, params)


def repair_by_schedule(variant, failed: int, helpers, indices, contents, forms: Mapping[int, Matrix],
                       params: SystemParams) -> tuple[NodeContent, RepairMetrics]:
    """Transfer repair driven by an arbitrary unit-level schedule.

    ``indices[j]`` is the 1-based stored position that helper ``helpers[j]``
    passes in every unit; ``forms`` are the unit-level linear forms of each
    node (see :func:`codes.node_forms`).  Raises when the passed symbols do
    not determine the failed node.
    """
    variant = Variant(variant)
    contents = _by_id(contents)
    helpers = _check_helpers(failed, helpers, params)
    indices = tuple(int(i) for i in indices)
    if len(indices) != len(helpers):
        raise RepairError("one index per helper is required")
    passed = Matrix(params.field, np.stack([forms[h].a[i - 1] for h, i in zip(helpers, indices)]))
    try:
        # failed_forms = X @ passed, found as passed^T X^T = failed_forms^T
        xt = mat_solve_any(passed.T, forms[failed].T)
    except ArithmeticError:
        raise TransferNotAdmissibleError(
            f"passing positions {indices} from helpers {helpers} does not determine node {failed}"
        ) from None
    units = _helper_units(contents, helpers, variant, params)
    payload = np.stack([u[:, i - 1] for u, i in zip(units, indices)], axis=1)
    content = content_from_units(failed, variant, params.field.matmul(payload, xt.a), params)
    return content, _transfer_metrics(variant, failed, helpers, params)


def transfer_admissible(variant, failed: int, helpers, params: SystemParams) -> bool:
    """Whether the variant's own construction repairs ``failed`` by transfer from ``helpers``."""
    variant = Variant(variant)
    if variant is Variant.C1:
        return failed <= params.d
    if variant is Variant.C2:
        return set(helpers) == set(designated_helpers(failed, params))
    if variant is Variant.COMPLETE_GRAPH:
        return True
    return False


def repair(variant, failed: int, helpers, contents, vectors, params, mode: str = "auto"):
    """Dispatch to the transfer path when admissible (or required), else compute."""
    variant = Variant(variant)
    if mode not in ("auto", "transfer", "compute"):
        raise ValueError(f"unknown repair mode {mode!r}")
    use_transfer = mode == "transfer" or (mode == "auto" and transfer_admissible(variant, failed, helpers, params))
    if variant is Variant.COMPLETE_GRAPH:
        if mode == "compute":
            raise UnsupportedVariantError("the complete-graph code repairs by transfer only")
        return repair_by_transfer_complete_graph(failed, contents, params)
    if not use_transfer:
        return repair_compute(variant, failed, helpers, contents, vectors, params)
    if variant is Variant.C1:
        return repair_by_transfer_c1(failed, helpers, contents, vectors, params)
    if variant is Variant.C2:
        return repair_by_transfer_c2(failed, contents, vectors, params, helpers=helpers)
    raise TransferNotAdmissibleError(f"{variant} has no built-in repair-by-transfer path")


def _left_apply(field, a: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``a @ y[u]`` for every u; y has shape (U, r, c)."""
    u, r, c = y.shape
    flat = y.transpose(0, 2, 1).reshape(u * c, r)
    out = field.matmul(flat, a.T)
    return out.reshape(u, c, a.shape[0]).transpose(0, 2, 1)


def decode_all(variant, nodes, vectors: EncodingVectors | None, params: SystemParams,
               systematic: bool = False) -> np.ndarray:
    """Recover the message, shape (stripes, B), from the first k given nodes."""
    variant = Variant(variant)
    nodes = _by_id(nodes)
    if len(nodes) < params.k:
        raise RepairError(f"need at least k={params.k} nodes, got {len(nodes)}")
    chosen = list(nodes)[: params.k]
    for i in chosen:
        if nodes[i].variant != variant:
            raise RepairError(f"node {i} holds {nodes[i].variant} content, expected {variant}")
    if variant is Variant.COMPLETE_GRAPH:
        units = _decode_complete_graph(chosen, nodes, params)
    else:
        units = _decode_product_matrix(variant, chosen, nodes, vectors, params)
        if systematic:
            units = unprecode_units(units, vectors, params)
    return units.reshape(-1, params.B)


def _decode_product_matrix(variant, chosen, nodes, vectors, params) -> np.ndarray:
    field, k, d = params.field, params.k, params.d
    # strip each node transform: y_i = psi_i^T M
    y = np.stack(
        [field.matmul(nodes[i].units(params), phi_inverse(variant, i, vectors, params).a) for i in chosen],
        axis=1,
    )
    psi = vectors.rows(chosen).a
    a_inv = mat_inverse(Matrix(field, psi[:, :k])).a
    r = _left_apply(field, a_inv, y[:, :, k:])
    # first k columns of Psi M are A S + B R^T
    brt = _left_apply(field, psi[:, k:], r.transpose(0, 2, 1))
    s = _left_apply(field, a_inv, field.sub(y[:, :, :k], brt))
    m = np.zeros((y.shape[0], d, d), dtype=np.int64)
    m[:, :k, :k] = s
    m[:, :k, k:] = r
    m[:, k:, :k] = r.transpose(0, 2, 1)
    return flatten_message_stack(m, params)


def _decode_complete_graph(chosen, nodes, params) -> np.ndarray:
    gen = complete_graph_generator(params)
    seen: dict[int, np.ndarray] = {}
    for i in chosen:
        u = nodes[i].units(params)
        for pos, e in enumerate(incident_edges(i, params.n)):
            seen.setdefault(e, u[:, pos])
    if len(seen) < params.unit_size:
        raise RepairError(f"only {len(seen)} distinct edge symbols, need {params.unit_size}")
    picked = sorted(seen)[: params.unit_size]
    sub = Matrix(params.field, gen.a[picked])
    vals = np.stack([seen[e] for e in picked], axis=1)
    return params.field.matmul(vals, mat_inverse(sub).a.T)


def check_metrics_bounds(metrics: RepairMetrics, params: SystemParams) -> None:
    """Raise unless download per helper meets the MBR lower bound with equality.

    For transfer repairs the read per helper must meet it too.
    """
    bound = params.B // params.unit_size  # B / (kd - k(k-1)/2) == beta
    if any(dl != bound for dl in metrics.symbols_downloaded):
        raise ParameterError(f"download {metrics.symbols_downloaded} differs from the bound {bound}")
    if metrics.pure_transfer and any(r != bound for r in metrics.symbols_read):
        raise ParameterError(f"read {metrics.symbols_read} differs from the bound {bound}")
