"""Random-oracle style hashes built on SHAKE-256 with a one-byte domain tag.

h  : bytes -> R_q^l          (tag 0x01)
h1 : bytes -> R_q^(l x k)    (tag 0x02)
commit : (payload, nonce) -> 32 bytes  (tag 0x03)
transcript challenge -> {0, 1, 2}      (tag 0x04, regression mode only)

Uniform coefficients come from rejection sampling: the XOF stream is cut into
little-endian words of ceil(log2 q / 8) bytes, masked to ceil(log2 q) bits,
and words >= q are skipped.
"""

from __future__ import annotations

import hashlib
from enum import IntEnum

import numpy as np

from .params import ParamSet


class DomainTag(IntEnum):
    H = 0x01
    H1 = 0x02
    COMMIT = 0x03
    CHALLENGE = 0x04


COMMIT_BYTES = 32
NONCE_BYTES = 32


def xof(tag: DomainTag, data: bytes, length: int) -> bytes:
    return hashlib.shake_256(bytes([tag]) + data).digest(length)


def uniform_mod_q(tag: DomainTag, data: bytes, q: int, count: int) -> np.ndarray:
    bits = (q - 1).bit_length()
    width = (bits + 7) // 8
    mask = (1 << bits) - 1
    accept = q / (1 << bits)
    want = int(count / accept * 1.02) + 16
    while True:
        raw = np.frombuffer(xof(tag, data, want * width), dtype=np.uint8).reshape(want, width)
        words = (raw.astype(np.int64) << (8 * np.arange(width))).sum(axis=1) & mask
        good = words[words < q]
        if good.size >= count:
            return good[:count]
        want *= 2   # prefix-stable: a longer XOF read extends the same stream


def hash_to_ring_vec(msg: bytes, p: ParamSet, tag: DomainTag = DomainTag.H) -> np.ndarray:
    """h(msg) in R_q^l, shape (l, n)."""
    return uniform_mod_q(tag, bytes(msg), p.q, p.l * p.n).reshape(p.l, p.n)


def hash_to_ring_mat(msg: bytes, p: ParamSet) -> np.ndarray:
    """h1(msg) in R_q^(l x k), shape (l, k, n)."""
    return uniform_mod_q(DomainTag.H1, bytes(msg), p.q, p.l * p.k * p.n).reshape(p.l, p.k, p.n)


def commit(payload: bytes, nonce: bytes) -> bytes:
    if len(nonce) != NONCE_BYTES:
        raise ValueError(f"nonce must be {NONCE_BYTES} bytes")
    return xof(DomainTag.COMMIT, bytes(nonce) + bytes(payload), COMMIT_BYTES)


def transcript_challenge(transcript: bytes) -> int:
    """Deterministic challenge in {0,1,2}; for regression runs, not a security mode."""
    counter = 0
    while True:
        for b in xof(DomainTag.CHALLENGE, counter.to_bytes(4, "little") + transcript, 64):
            if b < 255:
                return b % 3
        counter += 1
