"""Key generation, signing and the static (non-interactive) signature checks.

pk = (A, SD, H) with L = h1(SD) and H = L v mod q.
sk = (T, v) with A [T; I] = G and v short.
sig = (sigma1, sigma2, sigma3): sigma1 = h(L || r) is a fresh syndrome, sigma2 a
short preimage A sigma2 = sigma1, and sigma3 = h1(msg) v is the token whose
validity is only settled interactively.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

from . import codec
from .codec import FrameType
from .gaussian import RandomStream, sample_ring_vector
from .hashing import hash_to_ring_mat, hash_to_ring_vec
from .params import ParamSet, paramset_by_id
from .ring import euclidean_norm, get_ring
from .trapdoor import TrapdoorKey, ml_sample_pre, ml_trapgen

NONCE_R_BYTES = 32


@dataclass(eq=False)
class PublicKey:
    A: np.ndarray
    SD: bytes
    H: np.ndarray
    params: ParamSet

    @cached_property
    def A_hat(self):
        return get_ring(self.params.q, self.params.n).ntt(self.A)

    @cached_property
    def L(self) -> np.ndarray:
        return hash_to_ring_mat(self.SD, self.params)

    @cached_property
    def L_bytes(self) -> bytes:
        return codec.encode_modq(self.L, self.params.q)

    def to_bytes(self) -> bytes:
        payload = codec.encode_public_key_payload(self.A, self.SD, self.H, self.params)
        return codec.encode_frame(FrameType.PUBLIC_KEY, self.params, payload)

    @classmethod
    def from_bytes(cls, data: bytes) -> "PublicKey":
        f = codec.decode_frame(data, FrameType.PUBLIC_KEY)
        p = codec.frame_params(f)
        A, SD, H = codec.decode_public_key_payload(f.payload, p)
        return cls(A, SD, H, p)

    def __eq__(self, other):
        return (isinstance(other, PublicKey) and self.params == other.params and self.SD == other.SD
                and np.array_equal(self.A, other.A) and np.array_equal(self.H, other.H))


@dataclass(eq=False)
class SecretKey:
    T: np.ndarray
    v: np.ndarray
    params: ParamSet
    _key: TrapdoorKey | None = field(default=None, repr=False)

    def trapdoor(self, pk: PublicKey) -> TrapdoorKey:
        """Trapdoor bound to pk.A; caches the perturbation factorisation."""
        key = self._key
        if key is None or key.A is not pk.A:
            key = TrapdoorKey(A=pk.A, T=self.T, params=self.params)
            key.__dict__["A_hat"] = pk.A_hat
            self._key = key
        return key

    def to_bytes(self) -> bytes:
        payload = codec.encode_secret_key_payload(self.T, self.v, self.params)
        return codec.encode_frame(FrameType.SECRET_KEY, self.params, payload)

    @classmethod
    def from_bytes(cls, data: bytes) -> "SecretKey":
        f = codec.decode_frame(data, FrameType.SECRET_KEY)
        p = codec.frame_params(f)
        T, v = codec.decode_secret_key_payload(f.payload, p)
        return cls(T, v, p)

    def __eq__(self, other):
        return (isinstance(other, SecretKey) and self.params == other.params
                and np.array_equal(self.T, other.T) and np.array_equal(self.v, other.v))


@dataclass(eq=False)
class Signature:
    sigma1: np.ndarray
    sigma2: np.ndarray
    sigma3: np.ndarray
    params: ParamSet

    def to_bytes(self) -> bytes:
        return codec.encode_frame(FrameType.SIGNATURE, self.params, self.payload())

    def payload(self) -> bytes:
        return codec.encode_signature_payload(self.sigma1, self.sigma2, self.sigma3, self.params)

    @classmethod
    def from_payload(cls, buf: bytes, p: ParamSet) -> "Signature":
        return cls(*codec.decode_signature_payload(buf, p), p)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Signature":
        f = codec.decode_frame(data, FrameType.SIGNATURE)
        return cls.from_payload(f.payload, codec.frame_params(f))

    def replace(self, **kw) -> "Signature":
        d = dict(sigma1=self.sigma1, sigma2=self.sigma2, sigma3=self.sigma3, params=self.params)
        d.update(kw)
        return Signature(**d)

    def __eq__(self, other):
        return (isinstance(other, Signature) and self.params == other.params
                and all(np.array_equal(getattr(self, f), getattr(other, f))
                        for f in ("sigma1", "sigma2", "sigma3")))


class VerifyResult(Enum):
    OK = "ok"
    NORM_BOUND = "norm_bound"
    SYNDROME_MISMATCH = "syndrome_mismatch"

    def __bool__(self):
        return self is VerifyResult.OK


def ml_keygen(p: ParamSet, rng: RandomStream) -> tuple[PublicKey, SecretKey]:
    key = ml_trapgen(p, rng)
    SD = rng.bytes(32)
    pk = PublicKey(key.A, SD, np.zeros((p.l, p.n), dtype=np.int64), p)
    v = sample_ring_vector(p.k, p.beta, p.n, rng, p.t)
    pk.H = get_ring(p.q, p.n).matvec(pk.L, v)
    pk.__dict__["A_hat"] = key.A_hat
    key.perturbation(p.chi, p.alpha)   # fails early with CovarianceNotPD
    sk = SecretKey(key.T, v, p)
    sk._key = key
    return pk, sk


def message_matrix(msg: bytes, p: ParamSet) -> np.ndarray:
    """M = h1(msg)."""
    return hash_to_ring_mat(msg, p)


def sigma3_for(msg: bytes, v, p: ParamSet, M=None) -> np.ndarray:
    if M is None:
        M = message_matrix(msg, p)
    return get_ring(p.q, p.n).matvec(M, np.asarray(v) % p.q)


def ml_sign(msg: bytes, sk: SecretKey, pk: PublicKey, p: ParamSet, rng: RandomStream) -> Signature:
    r = rng.bytes(NONCE_R_BYTES)
    s1 = hash_to_ring_vec(pk.L_bytes + r, p)
    s2 = ml_sample_pre(sk.trapdoor(pk), s1, p.chi, p.alpha, rng)
    s3 = sigma3_for(msg, sk.v, p)
    return Signature(s1, s2, s3, p)


def ml_sign_many(msg: bytes, count: int, sk: SecretKey, pk: PublicKey, p: ParamSet,
                 rng: RandomStream) -> list[Signature]:
    """``count`` independent signatures on one message, preimages drawn in a batch."""
    s1 = np.stack([hash_to_ring_vec(pk.L_bytes + rng.bytes(NONCE_R_BYTES), p) for _ in range(count)])
    s2 = ml_sample_pre(sk.trapdoor(pk), s1, p.chi, p.alpha, rng)
    s3 = sigma3_for(msg, sk.v, p)
    return [Signature(s1[i], s2[i], s3, p) for i in range(count)]


def verify_static(msg: bytes, sig: Signature, pk: PublicKey, p: ParamSet) -> VerifyResult:
    """Norm bound on sigma2 and A sigma2 = sigma1; sigma3 is not judged here."""
    if euclidean_norm(sig.sigma2) > p.sig_bound:
        return VerifyResult.NORM_BOUND
    ring = get_ring(p.q, p.n)
    if not np.array_equal(ring.matvec(pk.A, sig.sigma2 % p.q, pk.A_hat), np.asarray(sig.sigma1) % p.q):
        return VerifyResult.SYNDROME_MISMATCH
    return VerifyResult.OK


def load_params_of(data: bytes) -> ParamSet:
    return paramset_by_id(codec.decode_frame(data).set_id)
