"""On-disk formats: node block files and the object manifest.

Block file layout (all integers big-endian)::

    offset  size  field
    0       4     magic b"PMBR"
    4       1     format version (1)
    5       1     variant tag: 0 baseline, 1 c1, 2 c2, 3 complete-graph
    6       1     n
    7       1     k
    8       1     d
    9       1     beta
    10      1     node id (1-based)
    11      1     field kind: 0 prime, 1 binary extension
    12      4     q
    16      4     reduction polynomial (0 for prime fields)
    20      8     stripe count
    28      1     bytes per symbol (1 if q <= 256, else 2)
    29      1     flags: bit 0 set when the c1 message was systematically precoded
    30      ...   stripes * alpha symbols, stripe-major

The manifest is a JSON document (see :func:`write_manifest`).
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .codes import NodeContent, Variant
from .field import Field, parse_field
from .params import SystemParams, make_params

MAGIC = b"PMBR"
VERSION = 1
HEADER = struct.Struct(">4sBBBBBBBBIIQBB")
VARIANT_TAGS = {Variant.BASELINE: 0, Variant.C1: 1, Variant.C2: 2, Variant.COMPLETE_GRAPH: 3}
TAG_VARIANTS = {v: k for k, v in VARIANT_TAGS.items()}
MANIFEST_VERSION = 1
CSV_VERSION = 1


class FormatError(ValueError):
    pass


def symbol_width(q: int) -> int:
    return 1 if q <= 256 else 2


@dataclass(frozen=True)
class BlockHeader:
    params: SystemParams
    variant: Variant
    node_id: int
    stripes: int
    systematic: bool


def encode_block(content: NodeContent, params: SystemParams, systematic: bool = False) -> bytes:
    f = params.field
    width = symbol_width(f.q)
    head = HEADER.pack(
        MAGIC, VERSION, VARIANT_TAGS[content.variant], params.n, params.k, params.d, params.beta,
        content.node_id, 0 if f.kind == "prime" else 1, f.q, f.poly, content.stripes, width, int(systematic),
    )
    dtype = ">u1" if width == 1 else ">u2"
    return head + content.symbols.astype(dtype).tobytes()


def decode_block(data: bytes) -> tuple[BlockHeader, NodeContent]:
    if len(data) < HEADER.size:
        raise FormatError("block file is shorter than its header")
    (magic, version, tag, n, k, d, beta, node_id, kind, q, poly, stripes, width, flags) = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported block format version {version}")
    if tag not in TAG_VARIANTS:
        raise FormatError(f"unknown variant tag {tag}")
    if kind not in (0, 1) or width != symbol_width(q):
        raise FormatError("inconsistent field description in header")
    try:
        field = Field.prime(q) if kind == 0 else Field.binary(q.bit_length() - 1, poly)
        params = make_params(n, k, d, field, beta)
    except ValueError as e:
        raise FormatError(f"invalid parameters in header: {e}") from None
    if not 1 <= node_id <= n:
        raise FormatError(f"node id {node_id} out of range")
    body = data[HEADER.size:]
    count = stripes * params.alpha
    if len(body) != count * width:
        raise FormatError(f"expected {count * width} payload bytes, found {len(body)}")
    sym = np.frombuffer(body, dtype=">u1" if width == 1 else ">u2").astype(np.int64)
    if sym.size and sym.max() >= q:
        raise FormatError("payload symbol out of range")
    sym = sym.reshape(stripes, params.alpha)
    sym.setflags(write=False)
    variant = TAG_VARIANTS[tag]
    return BlockHeader(params, variant, node_id, stripes, bool(flags & 1)), NodeContent(node_id, variant, sym)


def write_block(path: Path, content: NodeContent, params: SystemParams, systematic: bool = False) -> None:
    Path(path).write_bytes(encode_block(content, params, systematic))


def read_block(path: Path) -> tuple[BlockHeader, NodeContent]:
    return decode_block(Path(path).read_bytes())


def block_name(node_id: int) -> str:
    return f"node{node_id:02d}.blk"


def sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclass
class Manifest:
    params: SystemParams
    variant: Variant
    length: int
    stripes: int
    blocks: dict[int, str]
    checksum: str
    systematic: bool = False

    def to_dict(self) -> dict:
        p = self.params
        return {
            "manifest_version": MANIFEST_VERSION,
            "csv_version": CSV_VERSION,
            "n": p.n, "k": p.k, "d": p.d, "q": p.q, "field": p.field.name, "beta": p.beta,
            "variant": str(self.variant),
            "systematic": self.systematic,
            "length": self.length,
            "stripes": self.stripes,
            "blocks": {str(i): name for i, name in sorted(self.blocks.items())},
            "sha256": self.checksum,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Manifest":
        try:
            if doc.get("manifest_version") != MANIFEST_VERSION:
                raise FormatError(f"unsupported manifest version {doc.get('manifest_version')}")
            field = parse_field(doc["field"])
            params = make_params(doc["n"], doc["k"], doc["d"], field, doc["beta"])
            m = cls(params, Variant(doc["variant"]), int(doc["length"]), int(doc["stripes"]),
                    {int(i): name for i, name in doc["blocks"].items()}, doc["sha256"],
                    bool(doc.get("systematic", False)))
        except (KeyError, TypeError, ValueError) as e:
            raise FormatError(f"invalid manifest: {e}") from None
        if m.stripes * params.B < m.length:
            raise FormatError("stripe count does not cover the object length")
        return m


def write_manifest(path: Path, manifest: Manifest) -> None:
    Path(path).write_text(json.dumps(manifest.to_dict(), indent=2) + "\n")


def read_manifest(path: Path) -> Manifest:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise FormatError(f"manifest is not valid JSON: {e}") from None
    return Manifest.from_dict(doc)


def bytes_to_symbols(data: bytes, params: SystemParams) -> tuple[np.ndarray, int]:
    """Zero-pad to whole stripes; returns (stripes x B array, stripe count).

    An empty object still occupies one stripe.
    """
    if params.q < 256:
        raise FormatError(f"byte data needs a field with q >= 256, got {params.q}")
    stripes = max(1, -(-len(data) // params.B))
    buf = np.zeros(stripes * params.B, dtype=np.int64)
    buf[: len(data)] = np.frombuffer(data, dtype=np.uint8)
    return buf.reshape(stripes, params.B), stripes


def symbols_to_bytes(symbols: np.ndarray, length: int) -> bytes:
    flat = np.asarray(symbols).reshape(-1)[:length]
    if flat.size and flat.max() > 255:
        raise FormatError("decoded symbol does not fit in a byte")
    return flat.astype(np.uint8).tobytes()
