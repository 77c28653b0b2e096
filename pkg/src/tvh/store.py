"""Single-file store of per-video hash records.

File layout (little-endian throughout)::

    header   b"TVHS" | version:u8
    record*  length:u32 | payload | crc32(payload):u32
    index    b"TVHI" | count:u32 | (id_len:u16 | id:utf8 | offset:u64)* | crc32:u32
    trailer  index_offset:u64 | b"TVHE"

Record payload::

    id_len:u16 | id:utf8 | fingerprint:32 bytes (SHA-256 digest)
    frames:u32 | frame hashes: frames*2 float64
    flow_flag:u8 (1 = hash present, 0 = zero sentinel) | bins:u32
    flow_len:u32 | flow values: flow_len float64 (omitted when flag is 0)

Writers rewrite the whole file through a temporary file and an atomic
rename, so readers never see a half-written store.
"""
from __future__ import annotations

import os
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CorruptStore, FingerprintMismatch, IoFailure, NotFound
from .flow_hash import FlowHash
from .frame_hash import FrameHashSeries

MAGIC = b"TVHS"
VERSION = 1
INDEX_MAGIC = b"TVHI"
TRAILER_MAGIC = b"TVHE"


@dataclass(frozen=True, eq=False)
class HashRecord:
    source_id: str
    frame_hashes: FrameHashSeries
    flow_hash: FlowHash
    config_fingerprint: str

    def __eq__(self, other):
        if not isinstance(other, HashRecord):
            return NotImplemented
        return (self.source_id == other.source_id
                and self.config_fingerprint == other.config_fingerprint
                and self.frame_hashes == other.frame_hashes
                and self.flow_hash == other.flow_hash)

    __hash__ = None


def check_fingerprint(record: HashRecord, expected: str) -> None:
    if record.config_fingerprint != expected:
        raise FingerprintMismatch(
            f"record {record.source_id!r} was hashed under config "
            f"{record.config_fingerprint[:12]}, expected {expected[:12]}")


def encode_record(rec: HashRecord) -> bytes:
    sid = rec.source_id.encode("utf-8")
    fp = bytes.fromhex(rec.config_fingerprint)
    if len(fp) != 32:
        raise ValueError("fingerprint must be a SHA-256 hex digest")
    coeffs = np.ascontiguousarray(rec.frame_hashes.coeffs, dtype="<f8")
    flow = np.ascontiguousarray(rec.flow_hash.values, dtype="<f8")
    sentinel = rec.flow_hash.is_sentinel
    parts = [
        struct.pack("<H", len(sid)), sid, fp,
        struct.pack("<I", coeffs.shape[0]), coeffs.tobytes(),
        struct.pack("<BII", 0 if sentinel else 1, rec.flow_hash.bins, flow.size),
    ]
    if not sentinel:
        parts.append(flow.tobytes())
    return b"".join(parts)


def decode_record(payload: bytes) -> HashRecord:
    try:
        (n,) = struct.unpack_from("<H", payload, 0)
        pos = 2
        sid = payload[pos:pos + n].decode("utf-8")
        pos += n
        fp = payload[pos:pos + 32].hex()
        pos += 32
        (frames,) = struct.unpack_from("<I", payload, pos)
        pos += 4
        coeffs = np.frombuffer(payload, dtype="<f8", count=2 * frames, offset=pos)
        pos += 16 * frames
        flag, bins, flow_len = struct.unpack_from("<BII", payload, pos)
        pos += 9
        if flag:
            flow = np.frombuffer(payload, dtype="<f8", count=flow_len, offset=pos)
            pos += 8 * flow_len
        else:
            flow = np.zeros(flow_len)
    except (struct.error, ValueError, UnicodeDecodeError) as exc:
        raise CorruptStore(f"malformed record payload: {exc}") from exc
    if pos != len(payload):
        raise CorruptStore("record payload has trailing bytes")
    return HashRecord(sid, FrameHashSeries(coeffs), FlowHash(flow, bins), fp)


def _read_all(path: Path) -> dict:
    """Every record in file order, keyed by id; validates each checksum."""
    data = _read_bytes(path)
    index_offset = _check_envelope(data)
    records = {}
    pos = len(MAGIC) + 1
    while pos < index_offset:
        payload, pos = _read_frame(data, pos, index_offset)
        rec = decode_record(payload)
        records[rec.source_id] = rec
    return records


def _read_bytes(path: Path) -> bytes:
    try:
        return path.read_bytes()
    except FileNotFoundError:
        raise
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def _check_envelope(data: bytes) -> int:
    if len(data) < 5 + 12 or not data.startswith(MAGIC):
        raise CorruptStore("not a hash store (bad magic)")
    if data[4] != VERSION:
        raise CorruptStore(f"unsupported store version {data[4]}")
    if data[-4:] != TRAILER_MAGIC:
        raise CorruptStore("store trailer missing; file truncated?")
    (index_offset,) = struct.unpack_from("<Q", data, len(data) - 12)
    if not 5 <= index_offset <= len(data) - 12:
        raise CorruptStore("index offset out of range")
    return index_offset


def _read_frame(data, pos, limit):
    if pos + 4 > limit:
        raise CorruptStore("record length truncated")
    (length,) = struct.unpack_from("<I", data, pos)
    end = pos + 4 + length
    if end + 4 > limit:
        raise CorruptStore("record payload truncated")
    payload = data[pos + 4:end]
    (crc,) = struct.unpack_from("<I", data, end)
    if zlib.crc32(payload) != crc:
        raise CorruptStore(f"checksum mismatch in record at byte {pos}")
    return payload, end + 4


def _read_index(data: bytes, index_offset: int) -> dict:
    end = len(data) - 12
    blob = data[index_offset:end]
    if len(blob) < 12 or not blob.startswith(INDEX_MAGIC):
        raise CorruptStore("index block missing")
    body, (crc,) = blob[:-4], struct.unpack_from("<I", blob, len(blob) - 4)
    if zlib.crc32(body) != crc:
        raise CorruptStore("index checksum mismatch")
    (count,) = struct.unpack_from("<I", body, 4)
    pos = 8
    index = {}
    try:
        for _ in range(count):
            (n,) = struct.unpack_from("<H", body, pos)
            sid = body[pos + 2:pos + 2 + n].decode("utf-8")
            (offset,) = struct.unpack_from("<Q", body, pos + 2 + n)
            index[sid] = offset
            pos += 2 + n + 8
    except (struct.error, UnicodeDecodeError) as exc:
        raise CorruptStore(f"malformed index: {exc}") from exc
    return index


def _write_all(path: Path, records: dict) -> None:
    out = bytearray(MAGIC + bytes([VERSION]))
    offsets = {}
    for sid, rec in records.items():
        payload = encode_record(rec)
        offsets[sid] = len(out)
        out += struct.pack("<I", len(payload)) + payload + struct.pack("<I", zlib.crc32(payload))
    index_offset = len(out)
    body = bytearray(INDEX_MAGIC + struct.pack("<I", len(offsets)))
    for sid in sorted(offsets):
        raw = sid.encode("utf-8")
        body += struct.pack("<H", len(raw)) + raw + struct.pack("<Q", offsets[sid])
    out += body + struct.pack("<I", zlib.crc32(bytes(body)))
    out += struct.pack("<Q", index_offset) + TRAILER_MAGIC
    tmp = path.with_name(path.name + ".part")
    try:
        tmp.write_bytes(bytes(out))
        os.replace(tmp, path)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def put(record: HashRecord, store_path) -> None:
    """Insert ``record``, replacing any earlier record with the same id."""
    path = Path(store_path)
    records = _read_all(path) if path.exists() else {}
    records[record.source_id] = record
    _write_all(path, records)


def get(source_id: str, store_path) -> HashRecord:
    path = Path(store_path)
    if not path.exists():
        raise NotFound(f"store {path} does not exist")
    data = _read_bytes(path)
    index_offset = _check_envelope(data)
    index = _read_index(data, index_offset)
    if source_id not in index:
        raise NotFound(f"no record for {source_id!r} in {path}")
    payload, _ = _read_frame(data, index[source_id], index_offset)
    rec = decode_record(payload)
    if rec.source_id != source_id:
        raise CorruptStore("index points at the wrong record")
    return rec


def list_ids(store_path) -> list[str]:
    path = Path(store_path)
    if not path.exists():
        return []
    data = _read_bytes(path)
    return sorted(_read_index(data, _check_envelope(data)))


def is_store(path) -> bool:
    try:
        with open(path, "rb") as fh:
            return fh.read(4) == MAGIC
    except OSError:
        return False
