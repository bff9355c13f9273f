import numpy as np
import pytest

import fracodec as fc
from fracodec.stream import (
    AddressRangeError,
    BadMagicError,
    MatchRecord,
    StepOrderError,
    StreamError,
    TruncatedStreamError,
    VersionMismatchError,
    deserialize,
    header_bytes,
    iter_leaves,
    serialize,
)

import oracles


def _stream(records, *, pools=None, s_sets=None, mode="proposed", width=16, height=16):
    return fc.CompressedStream(
        width=width,
        height=height,
        mode=mode,
        strides=(8, 4, 2, 2),
        s_sets=s_sets or ((0.1,), (0.2, 0.4), (0.3, 0.8), (0.5, 0.9)),
        pools=pools or tuple(tuple((4 * i, 0) for i in range(8)) for _ in range(4)),
        records=tuple(records),
    )


# --- field widths ------------------------------------------------------------

@pytest.mark.parametrize("pool_len, bits", [(64, 6), (32, 5), (100, 7), (1, 0), (2, 1)])
def test_address_width(pool_len, bits):
    s = _stream(
        [MatchRecord(1, 0, 0, 0, 0)],
        pools=tuple(tuple((i, 0) for i in range(pool_len)) for _ in range(4)),
    )
    assert s.address_bits(1) == bits


def test_s_width_by_policy():
    s = _stream([MatchRecord(1, 0, 0, 0, 0)])
    assert [s.s_bits(level) for level in (1, 2, 3, 4)] == [0, 1, 1, 1]
    b = _stream([MatchRecord(1, 0, 0, 0, 0)], s_sets=(tuple(np.linspace(0, 1, 10)),) * 4)
    assert [b.s_bits(level) for level in (1, 2, 3, 4)] == [4, 4, 4, 4]


def test_record_validation():
    with pytest.raises(ValueError):
        MatchRecord(0, 0, 0, 0, 0)
    with pytest.raises(ValueError):
        MatchRecord(1, 256, 0, 0, 0)
    with pytest.raises(ValueError):
        MatchRecord(1, 0, 8, 0, 0)
    with pytest.raises(ValueError):
        serialize(_stream([MatchRecord(1, 0, 0, 99, 0)]))


# --- round trips -------------------------------------------------------------

def test_roundtrip_trivial_flat_tree():
    s = _stream([MatchRecord(1, 128, 0, 0, 0)])
    assert deserialize(serialize(s)) == s


def test_roundtrip_random_streams(rng):
    for _ in range(50):
        spec = oracles.random_stream_spec(rng)
        stream = oracles.stream_from_spec(spec)
        data = serialize(stream)
        assert deserialize(data) == stream
        assert serialize(deserialize(data)) == data


def test_serializer_matches_independent_packer(rng):
    for _ in range(25):
        spec = oracles.random_stream_spec(rng)
        assert serialize(oracles.stream_from_spec(spec)) == oracles.pack_stream(**spec)


def test_depth_first_parse_example():
    # one 16x16 slot: three step-2 leaves, then the BR child splits into
    # four step-3 leaves
    records = [MatchRecord(2, 0, 0, 0, 0)] * 3 + [MatchRecord(3, 0, 0, 0, 0)] * 4
    s = _stream(records)
    layout = [(x, y, side) for _rec, x, y, side in iter_leaves(s)]
    assert layout == [
        (0, 0, 8),
        (8, 0, 8),
        (0, 8, 8),
        (8, 8, 4),
        (12, 8, 4),
        (8, 12, 4),
        (12, 12, 4),
    ]
    assert deserialize(serialize(s)) == s


def test_header_bytes_matches_serialized_prefix():
    s = _stream([MatchRecord(1, 5, 3, 2, 0)])
    data = serialize(s)
    assert len(data) == header_bytes(s) + (s.payload_bits() + 7) // 8


# --- documented parse errors -------------------------------------------------

def _valid_spec():
    return dict(
        width=16,
        height=16,
        mode_code=1,
        strides=(8, 4, 2, 2),
        s_sets=((0.1,), (0.2, 0.4), (0.3, 0.8), (0.5, 0.9)),
        pools=(((0, 0), (4, 0), (8, 0)),) * 4,
        records=[(1, 128, 0, 0, 0)],
    )


def test_bad_magic():
    data = oracles.pack_stream(**_valid_spec(), magic=b"JUNK")
    with pytest.raises(BadMagicError):
        deserialize(data)


def test_version_mismatch():
    data = oracles.pack_stream(**_valid_spec(), version=9)
    with pytest.raises(VersionMismatchError):
        deserialize(data)


def test_truncated_payload_bytes():
    data = oracles.pack_stream(**_valid_spec())
    with pytest.raises(TruncatedStreamError):
        deserialize(data[:-1])


def test_truncated_header():
    data = oracles.pack_stream(**_valid_spec())
    with pytest.raises(TruncatedStreamError):
        deserialize(data[:20])


def test_payload_ends_mid_record():
    data = oracles.pack_stream(**_valid_spec(), payload_bits=5)
    with pytest.raises(TruncatedStreamError):
        deserialize(data)


def test_domain_address_out_of_range():
    spec = _valid_spec()
    spec["records"] = [(1, 128, 0, 3, 0)]  # pool has 3 entries, 2-bit field
    with pytest.raises(AddressRangeError):
        deserialize(oracles.pack_stream(**spec))


def test_s_index_out_of_range():
    spec = _valid_spec()
    spec["mode_code"] = 0
    spec["s_sets"] = (tuple(np.linspace(0.1, 1.0, 10)),) * 4  # 4-bit field
    spec["records"] = [(1, 128, 0, 0, 12)]
    with pytest.raises(AddressRangeError):
        deserialize(oracles.pack_stream(**spec))


def test_step_shallower_than_slot():
    spec = _valid_spec()
    # top slot splits; second child carries a step-1 record
    spec["records"] = [(2, 0, 0, 0, 0), (1, 0, 0, 0, 0), (2, 0, 0, 0, 0), (2, 0, 0, 0, 0)]
    with pytest.raises(StepOrderError):
        deserialize(oracles.pack_stream(**spec))


def test_record_count_mismatch():
    data = oracles.pack_stream(**_valid_spec(), record_count=7)
    with pytest.raises(StreamError):
        deserialize(data)


def test_unknown_mode_code():
    spec = _valid_spec()
    spec["mode_code"] = 2
    with pytest.raises(StreamError):
        deserialize(oracles.pack_stream(**spec))


def test_invalid_geometry():
    spec = _valid_spec()
    spec["width"] = 24
    with pytest.raises(StreamError):
        deserialize(oracles.pack_stream(**spec))


def test_empty_s_set():
    spec = _valid_spec()
    spec["s_sets"] = ((), (0.2, 0.4), (0.3, 0.8), (0.5, 0.9))
    spec["records"] = []
    with pytest.raises(StreamError):
        deserialize(oracles.pack_stream(**spec))


def test_iter_leaves_rejects_short_record_list():
    s = _stream([MatchRecord(2, 0, 0, 0, 0)] * 3)  # needs a fourth child
    with pytest.raises(StreamError):
        iter_leaves(s)
