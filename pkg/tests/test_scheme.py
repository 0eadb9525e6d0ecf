import numpy as np
import pytest

from mlus.gaussian import make_rng, sample_ring_vector
from mlus.hashing import hash_to_ring_mat
from mlus.oracles import exact_norm
from mlus.ring import get_ring
from mlus.scheme import (Signature, VerifyResult, ml_keygen, ml_sign, ml_sign_many, sigma3_for,
                         verify_static)

from conftest import ring_poly


def test_keygen_relations(t0, t0_keys):
    pk, sk = t0_keys
    ring = get_ring(t0.q, t0.n)
    assert sk.trapdoor(pk).check_relation()
    assert np.array_equal(pk.H, ring.matvec(hash_to_ring_mat(pk.SD, t0), sk.v % t0.q))
    assert len(pk.SD) == 32
    assert exact_norm(sk.v) <= t0.secret_bound


def test_distinct_seeds_give_distinct_keys(t0):
    a, _ = ml_keygen(t0, make_rng(1))
    b, _ = ml_keygen(t0, make_rng(2))
    assert a.SD != b.SD and not np.array_equal(a.A, b.A)


def test_sign_verify_many(t0, t0_keys, rng):
    pk, sk = t0_keys
    for i in range(1000):
        msg = i.to_bytes(4, "little")
        assert verify_static(msg, ml_sign(msg, sk, pk, t0, rng), pk, t0) is VerifyResult.OK


def test_empty_message(t0, t0_keys, rng):
    pk, sk = t0_keys
    assert verify_static(b"", ml_sign(b"", sk, pk, t0, rng), pk, t0)


def test_fresh_randomness_same_token(t0, t0_keys, rng):
    pk, sk = t0_keys
    s, s2 = ml_sign(b"m", sk, pk, t0, rng), ml_sign(b"m", sk, pk, t0, rng)
    assert not np.array_equal(s.sigma1, s2.sigma1)
    assert not np.array_equal(s.sigma2, s2.sigma2)
    assert np.array_equal(s.sigma3, s2.sigma3)
    assert np.array_equal(s.sigma3, sigma3_for(b"m", sk.v, t0))


def test_batch_signing_valid(t0, t0_keys, rng):
    pk, sk = t0_keys
    sigs = ml_sign_many(b"batch", 50, sk, pk, t0, rng)
    assert all(verify_static(b"batch", s, pk, t0) for s in sigs)


def test_scaled_preimage_rejected(t0, t0_keys, t0_signed):
    pk, _ = t0_keys
    msg, sig = t0_signed
    # x3 stays far below the tail bound t chi sqrt(kn), so the syndrome check catches it
    assert verify_static(msg, sig.replace(sigma2=3 * sig.sigma2), pk, t0) is VerifyResult.SYNDROME_MISMATCH
    big = sig.replace(sigma2=40 * sig.sigma2)
    assert exact_norm(big.sigma2) > t0.sig_bound
    assert verify_static(msg, big, pk, t0) is VerifyResult.NORM_BOUND


def test_shifted_syndrome_rejected(t0, t0_keys, t0_signed):
    pk, _ = t0_keys
    msg, sig = t0_signed
    bad = sig.replace(sigma1=(sig.sigma1 + ring_poly([1], t0.n)) % t0.q)
    res = verify_static(msg, bad, pk, t0)
    assert res is VerifyResult.SYNDROME_MISMATCH and not res


def test_static_check_ignores_token(t0, t0_keys, t0_signed):
    pk, _ = t0_keys
    msg, sig = t0_signed
    assert verify_static(msg, sig.replace(sigma3=(sig.sigma3 + 1) % t0.q), pk, t0)


def test_token_difference_has_short_witness(t0):
    rng = make_rng(b"forgery-shadow")
    ring = get_ring(t0.q, t0.n)
    M = hash_to_ring_mat(b"m", t0)
    for _ in range(100):
        v = sample_ring_vector(t0.k, t0.beta, t0.n, rng, t0.t)
        w = sample_ring_vector(t0.k, t0.beta, t0.n, rng, t0.t)
        s3, s3b = ring.matvec(M, v % t0.q), ring.matvec(M, w % t0.q)
        assert np.array_equal(ring.matvec(M, (v - w) % t0.q), (s3 - s3b) % t0.q)
        assert exact_norm(v - w) <= 2 * t0.sig_bound
        assert exact_norm(v - w) <= 2 * t0.secret_bound


def test_signature_roundtrip_preserves_verification(t0, t0_keys, t0_signed):
    pk, _ = t0_keys
    msg, sig = t0_signed
    assert verify_static(msg, Signature.from_bytes(sig.to_bytes()), pk, t0)
