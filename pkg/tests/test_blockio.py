import numpy as np
import pytest

from mbrrepair.blockio import (
    HEADER,
    FormatError,
    Manifest,
    bytes_to_symbols,
    decode_block,
    encode_block,
    read_manifest,
    symbols_to_bytes,
    write_manifest,
)
from mbrrepair.codes import NodeContent, Variant
from mbrrepair.field import GF256, Field
from mbrrepair.params import make_params


def test_header_size():
    assert HEADER.size == 30


@pytest.mark.parametrize("field", [GF256, Field.prime(257), Field.prime(7)], ids=repr)
def test_block_roundtrip(field, rng):
    p = make_params(5, 2, 3, field, beta=2)
    sym = rng.integers(0, field.q, size=(4, p.alpha))
    c = NodeContent(3, Variant.C2, sym)
    header, back = decode_block(encode_block(c, p, systematic=True))
    assert back == c
    assert header.params == p and header.systematic and header.stripes == 4


def test_corrupt_blocks():
    p = make_params(4, 2, 2)
    data = encode_block(NodeContent(1, Variant.C1, np.zeros((1, 2), dtype=np.int64)), p)
    with pytest.raises(FormatError):
        decode_block(data[:10])
    with pytest.raises(FormatError):
        decode_block(b"XXXX" + data[4:])
    with pytest.raises(FormatError):
        decode_block(data + b"\0")
    bad_node = bytearray(data)
    bad_node[10] = 9
    with pytest.raises(FormatError):
        decode_block(bytes(bad_node))
    bad_params = bytearray(data)
    bad_params[7] = 4  # k > d
    with pytest.raises(FormatError):
        decode_block(bytes(bad_params))


def test_bytes_padding():
    p = make_params(4, 2, 2)
    sym, stripes = bytes_to_symbols(b"", p)
    assert stripes == 1 and not sym.any()
    sym, stripes = bytes_to_symbols(b"abcd", p)
    assert stripes == 2 and sym.shape == (2, 3)
    assert symbols_to_bytes(sym, 4) == b"abcd"
    with pytest.raises(FormatError):
        bytes_to_symbols(b"a", make_params(4, 2, 2, Field.prime(7)))


def test_manifest_roundtrip(tmp_path):
    p = make_params(6, 3, 4, Field.prime(257), beta=2)
    m = Manifest(p, Variant.C1, 100, 9, {i: f"node{i:02d}.blk" for i in range(1, 7)}, "ab" * 32, True)
    write_manifest(tmp_path / "m.json", m)
    assert read_manifest(tmp_path / "m.json") == m


def test_manifest_errors(tmp_path):
    path = tmp_path / "m.json"
    path.write_text("{not json")
    with pytest.raises(FormatError):
        read_manifest(path)
    path.write_text('{"manifest_version": 1, "n": 4}')
    with pytest.raises(FormatError):
        read_manifest(path)
    p = make_params(4, 2, 2)
    doc = Manifest(p, Variant.C1, 100, 1, {}, "", False).to_dict()
    with pytest.raises(FormatError):
        Manifest.from_dict(doc)  # one stripe of 3 bytes cannot hold 100
