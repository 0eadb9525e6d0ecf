import hashlib
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlus import codec
from mlus.codec import (BadDigest, BadMagic, FrameType, NonCanonical, RangeOverflow, Reader, TruncatedInput,
                        UnsupportedVersion)
from mlus.params import load_paramset
from mlus.scheme import PublicKey, SecretKey, Signature

P = load_paramset("T0")


def test_pack_bits_lsb_first():
    assert codec.pack_bits([1, 0, 3], 2) == bytes([0b110001])
    assert codec.unpack_bits(bytes([0b110001]), 3, 2).tolist() == [1, 0, 3]


def test_nonzero_padding_rejected():
    with pytest.raises(NonCanonical):
        codec.unpack_bits(bytes([0b11110001]), 3, 2)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 7680), min_size=1, max_size=64))
def test_modq_round_trip(values):
    buf = codec.encode_modq(values, 7681)
    assert codec.decode_modq(Reader(buf), (len(values),), 7681).tolist() == values


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-(1 << 19), (1 << 19) - 1), min_size=1, max_size=64))
def test_signed_round_trip(values):
    buf = codec.encode_signed(values, 20)
    assert codec.decode_signed(Reader(buf), (len(values),), 20).tolist() == values


def test_random_vectors_round_trip_byte_identical(rng):
    for _ in range(10**4):
        v = rng.integers(0, P.q, (P.k, P.n))
        buf = codec.encode_modq(v, P.q)
        back = codec.decode_modq(Reader(buf), v.shape, P.q)
        assert np.array_equal(back, v) and codec.encode_modq(back, P.q) == buf


def test_range_overflow():
    with pytest.raises(RangeOverflow):
        codec.encode_modq([7681], 7681)
    with pytest.raises(RangeOverflow):
        codec.encode_signed([1 << 19], 20)
    with pytest.raises(RangeOverflow):
        codec.encode_short_modq([4000], 7681)


def test_value_at_least_q_is_noncanonical():
    buf = codec.pack_bits([7681], 13)
    with pytest.raises(NonCanonical):
        codec.decode_modq(Reader(buf), (1,), 7681)


def test_permutation_round_trip_and_bijection():
    perm = np.array([1, 0] + list(range(2, 30)))
    back = codec.decode_permutation(Reader(codec.encode_permutation(perm)), 30)
    assert back.tolist() == perm.tolist()
    dup = codec.pack_bits([0, 0] + list(range(2, 30)), codec.perm_width(30))
    with pytest.raises(NonCanonical):
        codec.decode_permutation(Reader(dup), 30)
    out_of_range = codec.pack_bits([31] + list(range(1, 30)), codec.perm_width(30))
    with pytest.raises(NonCanonical):
        codec.decode_permutation(Reader(out_of_range), 30)


def _refresh_digest(frame: bytes) -> bytes:
    body = frame[:-32]
    return body + hashlib.sha3_256(body).digest()


def test_frame_errors(t0_keys):
    pk, _ = t0_keys
    f = pk.to_bytes()
    assert PublicKey.from_bytes(f) == pk
    with pytest.raises(BadMagic):
        codec.decode_frame(b"XLUS" + f[4:])
    with pytest.raises(UnsupportedVersion):
        codec.decode_frame(_refresh_digest(f[:4] + b"\x02" + f[5:]))
    with pytest.raises(TruncatedInput):
        codec.decode_frame(f[:-1])
    with pytest.raises(TruncatedInput):
        codec.decode_frame(f[:10])
    with pytest.raises(NonCanonical):
        codec.decode_frame(f + b"\x00")
    flipped = bytearray(f)
    flipped[40] ^= 1
    with pytest.raises(BadDigest):
        codec.decode_frame(bytes(flipped))
    with pytest.raises(NonCanonical):
        Signature.from_bytes(f)


def test_unknown_type_and_set_ids():
    bad_type = codec.HEADER.pack(codec.MAGIC, 1, 0x7F, 0, 0)
    with pytest.raises(NonCanonical):
        codec.decode_frame(bad_type + hashlib.sha3_256(bad_type).digest())
    bad_set = codec.HEADER.pack(codec.MAGIC, 1, FrameType.ERROR, 9, 0)
    with pytest.raises(NonCanonical):
        codec.decode_frame(bad_set + hashlib.sha3_256(bad_set).digest())


def test_payload_level_noncanonical_after_valid_digest(t0_signed):
    _, sig = t0_signed
    body = sig.payload() + b"\x00"
    frame = codec.encode_frame(FrameType.SIGNATURE, P, body)
    with pytest.raises(NonCanonical):
        Signature.from_bytes(frame)


def test_key_and_signature_round_trips(t0_keys, t0_signed):
    pk, sk = t0_keys
    _, sig = t0_signed
    for obj, cls in ((pk, PublicKey), (sk, SecretKey), (sig, Signature)):
        data = obj.to_bytes()
        back = cls.from_bytes(data)
        assert back == obj and back.to_bytes() == data


def test_header_layout(t0_signed):
    _, sig = t0_signed
    f = sig.to_bytes()
    magic, version, ftype, set_id, length = struct.unpack("<4sBBBQ", f[:15])
    assert (magic, version, ftype, set_id) == (b"MLUS", 1, 0x12, 0)
    assert len(f) == 15 + length + 32


def test_encoded_sizes_match_real_artifacts(t0_keys, t0_signed):
    pk, sk = t0_keys
    _, sig = t0_signed
    sizes = codec.encoded_sizes(P)
    assert (sizes["PK"], sizes["SK"], sizes["sigma"]) == (len(pk.to_bytes()), len(sk.to_bytes()),
                                                          len(sig.to_bytes()))
