"""Compressed stream model and its bit-exact serialized form.

File layout (version 1, all multi-byte integers little-endian):

    magic          4 bytes  b"FRAK"
    version        u8       1
    mode           u8       0 = baseline, 1 = proposed
    width, height  u32, u32
    strides        4 x u16  domain lattice step per level
    s sets         4 x (u8 count, count x f64)   active contrast set per level
    pools          4 x (u32 length, length x (u16 x, u16 y))
                            domain-block origins, pool rank order
    record_count   u32
    payload_bits   u64
    payload        bit-packed records, MSB-first, zero-padded to a byte

Each record packs: step-1 (2 bits), offset O (8 bits), isometry (3 bits),
domain address (ceil(log2(pool length)) bits for the record's level), and an
s index (ceil(log2(s set size)) bits; 0 bits when the set has one member).
Records appear in depth-first quadtree order, top-level 16x16 slots left to
right then top to bottom, children visited TL, TR, BL, BR. The tree shape is
implied: a slot at level L is a leaf iff the next record's step equals L.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

MAGIC = b"FRAK"
VERSION = 1

_MODE_CODES = {"baseline": 0, "proposed": 1}
_MODE_NAMES = {v: k for k, v in _MODE_CODES.items()}


class StreamError(Exception):
    """Base class for compressed-stream defects."""


class BadMagicError(StreamError):
    """The file does not start with the FRAK magic."""


class VersionMismatchError(StreamError):
    """The file's format version is not supported."""


class TruncatedStreamError(StreamError):
    """The header or record payload ends prematurely."""


class AddressRangeError(StreamError):
    """A stored index does not resolve against the header tables."""


class StepOrderError(StreamError):
    """A record's step is shallower than the slot being parsed."""


@dataclass(frozen=True)
class MatchRecord:
    """One coded range block as stored in the stream."""

    step: int  # 1..4
    offset: int  # 0..255
    isometry: int  # 0..7
    domain_address: int  # index into the level's pool coordinate list
    s_index: int  # index into the level's s set

    def __post_init__(self):
        if not 1 <= self.step <= 4:
            raise ValueError(f"step must be 1..4, got {self.step}")
        if not 0 <= self.offset <= 255:
            raise ValueError(f"offset must be 0..255, got {self.offset}")
        if not 0 <= self.isometry <= 7:
            raise ValueError(f"isometry must be 0..7, got {self.isometry}")
        if self.domain_address < 0 or self.s_index < 0:
            raise ValueError("indices must be non-negative")


def _index_bits(count: int) -> int:
    """Width of an index field addressing ``count`` items (0 bits for 1)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    return (count - 1).bit_length()


@dataclass(frozen=True)
class CompressedStream:
    """Parsed compressed image: header tables plus depth-first records."""

    width: int
    height: int
    mode: str
    strides: tuple[int, int, int, int]
    s_sets: tuple[tuple[float, ...], ...]
    pools: tuple[tuple[tuple[int, int], ...], ...]
    records: tuple[MatchRecord, ...]

    def address_bits(self, level: int) -> int:
        return _index_bits(len(self.pools[level - 1]))

    def s_bits(self, level: int) -> int:
        return _index_bits(len(self.s_sets[level - 1]))

    def record_bits(self, level: int) -> int:
        return 2 + 8 + 3 + self.address_bits(level) + self.s_bits(level)

    def payload_bits(self) -> int:
        return sum(self.record_bits(r.step) for r in self.records)

    def step_counts(self) -> tuple[int, int, int, int]:
        counts = [0, 0, 0, 0]
        for r in self.records:
            counts[r.step - 1] += 1
        return tuple(counts)


class BitWriter:
    """MSB-first bit packer."""

    def __init__(self):
        self._buf = bytearray()
        self._acc = 0
        self._nbits = 0

    def write(self, value: int, width: int) -> None:
        if width == 0:
            return
        if value < 0 or value >> width:
            raise ValueError(f"value {value} does not fit in {width} bits")
        self._acc = (self._acc << width) | value
        self._nbits += width
        while self._nbits >= 8:
            self._nbits -= 8
            self._buf.append((self._acc >> self._nbits) & 0xFF)
        self._acc &= (1 << self._nbits) - 1

    def getvalue(self) -> bytes:
        out = bytes(self._buf)
        if self._nbits:
            out += bytes([(self._acc << (8 - self._nbits)) & 0xFF])
        return out


class BitReader:
    """MSB-first bit unpacker bounded by an explicit bit length."""

    def __init__(self, data: bytes, bit_length: int):
        self._data = data
        self._bit_length = bit_length
        self.position = 0

    def _extract(self, pos: int, width: int) -> int:
        value = 0
        for i in range(width):
            p = pos + i
            value = (value << 1) | ((self._data[p >> 3] >> (7 - (p & 7))) & 1)
        return value

    def read(self, width: int) -> int:
        if self.position + width > self._bit_length:
            raise TruncatedStreamError("record payload ends mid-record")
        value = self._extract(self.position, width)
        self.position += width
        return value

    def peek(self, width: int) -> int:
        if self.position + width > self._bit_length:
            raise TruncatedStreamError("record payload ends mid-record")
        return self._extract(self.position, width)


def serialize(stream: CompressedStream) -> bytes:
    """Pack a stream into its canonical byte form."""
    head = bytearray()
    head += MAGIC
    head += struct.pack("<BB", VERSION, _MODE_CODES[stream.mode])
    head += struct.pack("<II", stream.width, stream.height)
    head += struct.pack("<4H", *stream.strides)
    for s_set in stream.s_sets:
        head += struct.pack("<B", len(s_set))
        head += struct.pack(f"<{len(s_set)}d", *s_set)
    for coords in stream.pools:
        head += struct.pack("<I", len(coords))
        for x, y in coords:
            head += struct.pack("<HH", x, y)
    head += struct.pack("<I", len(stream.records))

    writer = BitWriter()
    for rec in stream.records:
        level = rec.step
        a_bits = stream.address_bits(level)
        s_bits = stream.s_bits(level)
        if rec.domain_address >= len(stream.pools[level - 1]):
            raise ValueError(f"domain address {rec.domain_address} outside level-{level} pool")
        if rec.s_index >= len(stream.s_sets[level - 1]):
            raise ValueError(f"s index {rec.s_index} outside level-{level} s set")
        writer.write(rec.step - 1, 2)
        writer.write(rec.offset, 8)
        writer.write(rec.isometry, 3)
        writer.write(rec.domain_address, a_bits)
        writer.write(rec.s_index, s_bits)
    payload = writer.getvalue()
    head += struct.pack("<Q", stream.payload_bits())
    return bytes(head) + payload


class _HeaderReader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, fmt: str):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise TruncatedStreamError("header ends prematurely")
        values = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return values


def deserialize(data: bytes) -> CompressedStream:
    """Parse canonical bytes back into a CompressedStream, validating the
    header tables, every stored index, and the depth-first tree structure."""
    if len(data) < 4:
        raise TruncatedStreamError("file shorter than the magic")
    if data[:4] != MAGIC:
        raise BadMagicError(f"bad magic {data[:4]!r}")
    rd = _HeaderReader(data)
    rd.pos = 4
    version, mode_code = rd.take("<BB")
    if version != VERSION:
        raise VersionMismatchError(f"unsupported version {version}")
    if mode_code not in _MODE_NAMES:
        raise StreamError(f"unknown mode code {mode_code}")
    mode = _MODE_NAMES[mode_code]
    width, height = rd.take("<II")
    if width == 0 or height == 0 or width % 16 or height % 16:
        raise StreamError(f"invalid geometry {width}x{height}")
    strides = rd.take("<4H")
    s_sets = []
    for _ in range(4):
        (count,) = rd.take("<B")
        if count == 0:
            raise StreamError("empty s set")
        s_sets.append(rd.take(f"<{count}d"))
    pools = []
    for _ in range(4):
        (count,) = rd.take("<I")
        coords = []
        for _ in range(count):
            coords.append(tuple(rd.take("<HH")))
        pools.append(tuple(coords))
    (record_count,) = rd.take("<I")
    (payload_bits,) = rd.take("<Q")
    payload = data[rd.pos :]
    if len(payload) * 8 < payload_bits:
        raise TruncatedStreamError(
            f"payload holds {len(payload) * 8} bits, header declares {payload_bits}"
        )

    stream_proto = CompressedStream(
        width=width,
        height=height,
        mode=mode,
        strides=tuple(int(s) for s in strides),
        s_sets=tuple(tuple(s) for s in s_sets),
        pools=tuple(pools),
        records=(),
    )
    reader = BitReader(payload, payload_bits)
    records: list[MatchRecord] = []

    def read_record(level: int) -> MatchRecord:
        step = reader.read(2) + 1
        offset = reader.read(8)
        isometry = reader.read(3)
        address = reader.read(stream_proto.address_bits(level))
        if address >= len(pools[level - 1]):
            raise AddressRangeError(
                f"domain address {address} outside level-{level} pool of {len(pools[level - 1])}"
            )
        s_index = reader.read(stream_proto.s_bits(level))
        if s_index >= len(s_sets[level - 1]):
            raise AddressRangeError(f"s index {s_index} outside level-{level} s set")
        return MatchRecord(step, offset, isometry, address, s_index)

    def parse_slot(level: int) -> None:
        step = reader.peek(2) + 1
        if step < level:
            raise StepOrderError(f"step-{step} record inside a level-{level} slot")
        if step == level:
            records.append(read_record(level))
            return
        if level == 4:  # unreachable: step <= 4 always
            raise StepOrderError("level-4 slot cannot split")
        for _ in range(4):
            parse_slot(level + 1)

    for _ in range((height // 16) * (width // 16)):
        parse_slot(1)

    if len(records) != record_count:
        raise StreamError(f"parsed {len(records)} records, header declares {record_count}")
    if reader.position != payload_bits:
        raise StreamError(
            f"parsed {reader.position} payload bits, header declares {payload_bits}"
        )
    return CompressedStream(
        width=width,
        height=height,
        mode=mode,
        strides=stream_proto.strides,
        s_sets=stream_proto.s_sets,
        pools=stream_proto.pools,
        records=tuple(records),
    )


def iter_leaves(stream: CompressedStream):
    """Yield ``(record, x, y, side)`` for every leaf in depth-first order.

    The leaf footprints exactly tile the image; violations raise StreamError.
    """
    records = stream.records
    pos = 0
    out = []

    def walk(level: int, x: int, y: int, side: int) -> None:
        nonlocal pos
        if pos >= len(records):
            raise StreamError("record sequence ends before the image is tiled")
        step = records[pos].step
        if step < level:
            raise StepOrderError(f"step-{step} record inside a level-{level} slot")
        if step == level:
            out.append((records[pos], x, y, side))
            pos += 1
            return
        if level == 4:
            raise StepOrderError("level-4 slot cannot split")
        h = side // 2
        walk(level + 1, x, y, h)
        walk(level + 1, x + h, y, h)
        walk(level + 1, x, y + h, h)
        walk(level + 1, x + h, y + h, h)

    for ty in range(0, stream.height, 16):
        for tx in range(0, stream.width, 16):
            walk(1, tx, ty, 16)
    if pos != len(records):
        raise StreamError(f"{len(records) - pos} records beyond the image tiling")
    assert sum(side * side for _, _, _, side in out) == stream.width * stream.height
    return out


def header_bytes(stream: CompressedStream) -> int:
    """Size of the serialized header (everything before the bit payload)."""
    size = 4 + 2 + 8 + 8  # magic, version+mode, width+height, strides
    for s_set in stream.s_sets:
        size += 1 + 8 * len(s_set)
    for coords in stream.pools:
        size += 4 + 4 * len(coords)
    size += 4 + 8  # record_count, payload_bits
    return size
