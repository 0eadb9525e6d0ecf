import hashlib

import numpy as np
from scipy import stats

from mlus.codec import encode_modq
from mlus.hashing import (DomainTag, commit, hash_to_ring_mat, hash_to_ring_vec, transcript_challenge,
                          uniform_mod_q)
from mlus.oracles import CHI2_ALPHA
from mlus.params import load_paramset

P = load_paramset("T0")


def _reference_uniform(tag: int, data: bytes, q: int, count: int) -> list[int]:
    bits = (q - 1).bit_length()
    width = (bits + 7) // 8
    stream = hashlib.shake_256(bytes([tag]) + data).digest(width * count * 2)
    out = []
    for i in range(0, len(stream), width):
        w = int.from_bytes(stream[i:i + width], "little") & ((1 << bits) - 1)
        if w < q:
            out.append(w)
        if len(out) == count:
            return out
    raise AssertionError("stream too short")


def test_vector_hash_matches_reference_parser():
    got = hash_to_ring_vec(b"abc", P)
    assert got.ravel().tolist() == _reference_uniform(0x01, b"abc", P.q, P.l * P.n)
    assert got[0, :4].tolist() == [1876, 5637, 5391, 4036]


def test_matrix_hash_shape_and_reference():
    M = hash_to_ring_mat(b"msg", P)
    assert M.shape == (P.l, P.k, P.n)
    assert M.ravel().tolist() == _reference_uniform(0x02, b"msg", P.q, M.size)


def test_matrix_hash_shape_set_III():
    p = load_paramset("III")
    assert hash_to_ring_mat(b"", p).shape == (4, 128, 256)


def test_seed_zero_golden_digest():
    L = hash_to_ring_mat(b"\x00", P)
    assert L[0, 0, :4].tolist() == [590, 5853, 2553, 4791]
    digest = hashlib.sha3_256(encode_modq(L, P.q)).hexdigest()
    assert digest == "da344e025bd36489cf4d64544a4f29a576d9f00f6521ac9b232b58eeaeb44cb7"


def test_determinism_and_bit_sensitivity():
    assert np.array_equal(hash_to_ring_vec(b"x", P), hash_to_ring_vec(b"x", P))
    assert not np.array_equal(hash_to_ring_vec(b"\x00", P), hash_to_ring_vec(b"\x01", P))
    assert not np.array_equal(hash_to_ring_mat(b"\x00", P), hash_to_ring_mat(b"\x80", P))


def test_domain_separation():
    a = uniform_mod_q(DomainTag.H, b"same", P.q, 32)
    b = uniform_mod_q(DomainTag.H1, b"same", P.q, 32)
    assert not np.array_equal(a, b)


def test_commit_golden_and_layout():
    nonce = bytes(32)
    c = commit(b"", nonce)
    assert c.hex() == "0aadadc00b5b6f01e055733867c5a236566f292f900017371815355a679680c1"
    assert c == hashlib.shake_256(b"\x03" + nonce).digest(32)
    assert commit(b"p", nonce) == commit(b"p", nonce)
    assert commit(b"p", nonce) != commit(b"p", b"\x01" + bytes(31))


def test_uniformity_chi_square():
    q = P.q
    vals = np.concatenate([hash_to_ring_vec(i.to_bytes(4, "little"), P).ravel() for i in range(10**5)])
    bins = 64
    counts = np.bincount(vals * bins // q, minlength=bins)
    edges = np.array([(b * q + bins - 1) // bins for b in range(bins + 1)])
    expected = np.diff(edges) / q * vals.size
    assert stats.chisquare(counts, expected).pvalue > CHI2_ALPHA


def test_transcript_challenge_range_and_balance():
    ch = [transcript_challenge(i.to_bytes(4, "little")) for i in range(30000)]
    counts = np.bincount(ch, minlength=3)
    assert set(ch) == {0, 1, 2}
    assert stats.chisquare(counts).pvalue > CHI2_ALPHA
    assert transcript_challenge(b"x") == 2
