"""Canonical byte encodings for keys, signatures and protocol messages.

Frame layout (all integers little-endian):

    "MLUS" | version (1) | type (1) | set id (1) | payload length (8) | payload | sha3-256 digest (32)

The digest covers every preceding byte. Inside a payload, fields are
concatenated; each field is packed LSB-first and padded to a whole byte with
zero bits. Mod-q fields use ceil(log2 q) bits per coefficient, short signature
vectors use ceil(log2(2 t chi sqrt(kn))) bits in two's complement, and the
trapdoor T uses signed 32-bit words.

Decoding checks, in order: magic, version, length, digest, then field
contents. Anything that would not be re-emitted byte for byte by the encoder
is rejected as NonCanonical.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .params import SET_IDS, ParamSet, paramset_by_id

MAGIC = b"MLUS"
VERSION = 1
HEADER = struct.Struct("<4sBBBQ")
DIGEST_BYTES = 32
SEED_BYTES = 32
TRAPDOOR_WORD_BITS = 32


class CodecError(ValueError):
    pass


class BadMagic(CodecError):
    pass


class UnsupportedVersion(CodecError):
    pass


class TruncatedInput(CodecError):
    pass


class BadDigest(CodecError):
    pass


class NonCanonical(CodecError):
    pass


class RangeOverflow(CodecError):
    pass


class FrameType(IntEnum):
    PUBLIC_KEY = 0x10
    SECRET_KEY = 0x11
    SIGNATURE = 0x12
    INIT = 0x20
    COMMIT = 0x21
    CHALLENGE = 0x22
    RESPONSE = 0x23
    DONE = 0x24
    ERROR = 0x25
    NEXT = 0x26
    ACK = 0x27


FILE_EXT = {FrameType.PUBLIC_KEY: ".mlpk", FrameType.SECRET_KEY: ".mlsk", FrameType.SIGNATURE: ".mlsig"}


# -- bit packing ---------------------------------------------------------------

def pack_bits(values, width: int) -> bytes:
    """Pack non-negative integers (< 2^width) LSB-first, zero-padded to a byte."""
    v = np.asarray(values, dtype=np.uint64).ravel()
    bits = ((v[:, None] >> np.arange(width, dtype=np.uint64)) & np.uint64(1)).astype(np.uint8)
    return np.packbits(bits.ravel(), bitorder="little").tobytes()


def packed_len(count: int, width: int) -> int:
    return (count * width + 7) // 8


def unpack_bits(buf: bytes, count: int, width: int) -> np.ndarray:
    if len(buf) != packed_len(count, width):
        raise TruncatedInput("packed field has the wrong length")
    bits = np.unpackbits(np.frombuffer(buf, dtype=np.uint8), bitorder="little")
    if bits[count * width:].any():
        raise NonCanonical("non-zero padding bits")
    bits = bits[: count * width].reshape(count, width).astype(np.int64)
    return bits @ (np.int64(1) << np.arange(width, dtype=np.int64))


class Reader:
    def __init__(self, buf: bytes):
        self.buf = bytes(buf)
        self.pos = 0

    def take(self, size: int) -> bytes:
        if self.pos + size > len(self.buf):
            raise TruncatedInput(f"need {size} bytes at offset {self.pos}")
        out = self.buf[self.pos:self.pos + size]
        self.pos += size
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def finish(self):
        if self.pos != len(self.buf):
            raise NonCanonical(f"{len(self.buf) - self.pos} trailing bytes")


# -- field encoders ------------------------------------------------------------

def encode_modq(a, q: int) -> bytes:
    a = np.asarray(a, dtype=np.int64)
    if a.size and (a.min() < 0 or a.max() >= q):
        raise RangeOverflow("mod-q field must hold values in [0, q)")
    return pack_bits(a, (q - 1).bit_length())


def decode_modq(r: Reader, shape: tuple, q: int) -> np.ndarray:
    width = (q - 1).bit_length()
    count = math.prod(shape)
    a = unpack_bits(r.take(packed_len(count, width)), count, width)
    if a.size and a.max() >= q:
        raise NonCanonical("coefficient >= q")
    return a.reshape(shape)


def encode_signed(a, width: int) -> bytes:
    a = np.asarray(a, dtype=np.int64)
    lim = 1 << (width - 1)
    if a.size and (a.min() < -lim or a.max() >= lim):
        raise RangeOverflow(f"value does not fit in {width} signed bits")
    return pack_bits(a & ((1 << width) - 1), width)


def decode_signed(r: Reader, shape: tuple, width: int) -> np.ndarray:
    count = math.prod(shape)
    a = unpack_bits(r.take(packed_len(count, width)), count, width)
    a = np.where(a >= 1 << (width - 1), a - (1 << width), a)
    return a.reshape(shape)


def encode_short_modq(a, q: int) -> bytes:
    """A short integer vector stored by its residue mod q (centred on decode)."""
    a = np.asarray(a, dtype=np.int64)
    if a.size and np.abs(a).max() > q // 2:
        raise RangeOverflow("short vector exceeds q/2")
    return encode_modq(a % q, q)


def decode_short_modq(r: Reader, shape: tuple, q: int) -> np.ndarray:
    a = decode_modq(r, shape, q)
    return np.where(a > q // 2, a - q, a)


def perm_width(k: int) -> int:
    return max(1, (k - 1).bit_length())


def encode_permutation(perm) -> bytes:
    perm = np.asarray(perm, dtype=np.int64)
    k = perm.size
    if not np.array_equal(np.sort(perm), np.arange(k)):
        raise RangeOverflow("not a permutation")
    return pack_bits(perm, perm_width(k))


def decode_permutation(r: Reader, k: int) -> np.ndarray:
    w = perm_width(k)
    perm = unpack_bits(r.take(packed_len(k, w)), k, w)
    if not np.array_equal(np.sort(perm), np.arange(k)):
        raise NonCanonical("index array is not a bijection")
    return perm


# -- framing -------------------------------------------------------------------

@dataclass(frozen=True)
class Frame:
    ftype: FrameType
    set_id: int
    payload: bytes

    @property
    def params(self) -> ParamSet:
        return paramset_by_id(self.set_id)


def encode_frame(ftype: FrameType, p: ParamSet | None, payload: bytes) -> bytes:
    set_id = SET_IDS[p.name] if p is not None else 0xFF
    head = HEADER.pack(MAGIC, VERSION, int(ftype), set_id, len(payload)) + payload
    return head + hashlib.sha3_256(head).digest()


def frame_size(header: bytes) -> int:
    """Total frame length announced by a header (used by stream readers)."""
    check_header(header)
    return HEADER.size + HEADER.unpack(header[:HEADER.size])[4] + DIGEST_BYTES


def check_header(data: bytes):
    if not MAGIC.startswith(data[:len(MAGIC)]):
        raise BadMagic("missing MLUS magic")
    if len(data) < HEADER.size:
        raise TruncatedInput("short frame header")
    version = data[4]
    if version != VERSION:
        raise UnsupportedVersion(f"frame version {version}")


def decode_frame(data: bytes, expect: FrameType | None = None) -> Frame:
    data = bytes(data)
    check_header(data)
    _, _, ftype, set_id, length = HEADER.unpack(data[:HEADER.size])
    total = HEADER.size + length + DIGEST_BYTES
    if len(data) < total:
        raise TruncatedInput(f"frame announces {total} bytes, got {len(data)}")
    if len(data) > total:
        raise NonCanonical(f"{len(data) - total} bytes after frame")
    if hashlib.sha3_256(data[:-DIGEST_BYTES]).digest() != data[-DIGEST_BYTES:]:
        raise BadDigest("frame digest mismatch")
    try:
        ftype = FrameType(ftype)
    except ValueError:
        raise NonCanonical(f"unknown frame type 0x{ftype:02x}") from None
    if expect is not None and ftype != expect:
        raise NonCanonical(f"expected {expect.name} frame, got {ftype.name}")
    if set_id != 0xFF and set_id not in SET_IDS.values():
        raise NonCanonical(f"unknown parameter set id {set_id}")
    return Frame(ftype, set_id, data[HEADER.size:HEADER.size + length])


def frame_params(frame: Frame) -> ParamSet:
    if frame.set_id == 0xFF:
        raise NonCanonical("frame carries no parameter set")
    return frame.params


# -- keys and signatures -------------------------------------------------------

def encode_public_key_payload(A, SD: bytes, H, p: ParamSet) -> bytes:
    if len(SD) != SEED_BYTES:
        raise RangeOverflow("seed must be 32 bytes")
    return encode_modq(A, p.q) + bytes(SD) + encode_modq(H, p.q)


def decode_public_key_payload(buf: bytes, p: ParamSet):
    r = Reader(buf)
    A = decode_modq(r, (p.l, p.k, p.n), p.q)
    SD = r.take(SEED_BYTES)
    H = decode_modq(r, (p.l, p.n), p.q)
    r.finish()
    return A, SD, H


def encode_secret_key_payload(T, v, p: ParamSet) -> bytes:
    T = np.asarray(T, dtype=np.int64)
    return encode_signed(T, TRAPDOOR_WORD_BITS) + encode_short_modq(v, p.q)


def decode_secret_key_payload(buf: bytes, p: ParamSet):
    r = Reader(buf)
    T = decode_signed(r, (2 * p.l, p.l * p.m, p.n), TRAPDOOR_WORD_BITS)
    v = decode_short_modq(r, (p.k, p.n), p.q)
    r.finish()
    return T, v


def encode_signature_payload(s1, s2, s3, p: ParamSet) -> bytes:
    return encode_modq(s1, p.q) + encode_signed(s2, p.short_bits) + encode_modq(s3, p.q)


def decode_signature_payload(buf: bytes, p: ParamSet):
    r = Reader(buf)
    s1 = decode_modq(r, (p.l, p.n), p.q)
    s2 = decode_signed(r, (p.k, p.n), p.short_bits)
    s3 = decode_modq(r, (p.l, p.n), p.q)
    r.finish()
    return s1, s2, s3


def encoded_sizes(p: ParamSet) -> dict:
    """Byte sizes of the encoded artefacts (frames included) for a parameter set."""
    frame = HEADER.size + DIGEST_BYTES
    mq = lambda count: packed_len(count, p.qbits)
    pk = mq(p.l * p.k * p.n) + SEED_BYTES + mq(p.l * p.n)
    sk = packed_len(2 * p.l * p.l * p.m * p.n, TRAPDOOR_WORD_BITS) + mq(p.k * p.n)
    sig = 2 * mq(p.l * p.n) + packed_len(p.k * p.n, p.short_bits)
    return {"PK": pk + frame, "SK": sk + frame, "sigma": sig + frame,
            "A": mq(p.l * p.k * p.n), "H": mq(p.l * p.n),
            "T": packed_len(2 * p.l * p.l * p.m * p.n, TRAPDOOR_WORD_BITS), "v": mq(p.k * p.n)}
