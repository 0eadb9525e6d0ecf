"""Discrete Gaussian sampling over Z and over R^d, coefficient-wise.

Gaussian parameters use the width convention rho_{s,c}(x) = exp(-pi (x-c)^2 / s^2),
so the standard deviation of a wide sample is s / sqrt(2 pi).

The integer sampler draws from D_{Z,s,c} by rejection against a table-driven
half-Gaussian envelope of the same width: a candidate z = b + (2b-1) z0, with
z0 from the half-Gaussian and b a fair bit, covers Z and dominates
rho_{s,frac(c)} pointwise, so one uniform test per candidate gives exact
rejection sampling (up to double-precision tables). Samples are confined to
|x - c| <= tail * s. This is not constant time.
"""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_REJECTIONS = 10**6

RandomStream = np.random.Generator


class InternalSamplerFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class GaussParams:
    s: float
    c: float = 0.0
    tail: float = 12

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError("Gaussian parameter must be positive")
        if self.tail < 1:
            raise ValueError("tail cut must be >= 1")


def make_rng(seed: bytes | str | int | None = None) -> RandomStream:
    """Seedable deterministic stream. None draws the seed from OS entropy.

    Strings are parsed as hex. The generator is Philox; it is adequate for
    reproducible research runs but is not a vetted DRBG.
    """
    if seed is None:
        seed = os.urandom(32)
    elif isinstance(seed, str):
        seed = bytes.fromhex(seed.removeprefix("0x"))
    elif isinstance(seed, int):
        seed = seed.to_bytes(max(1, (seed.bit_length() + 7) // 8), "little")
    key = int.from_bytes(hashlib.shake_256(b"mlus-rng" + seed).digest(32), "little")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def rng_bytes(rng: RandomStream, n: int) -> bytes:
    return rng.bytes(n)


@lru_cache(maxsize=256)
def _half_cdf(s: float, tail: float) -> np.ndarray:
    top = max(1, int(math.floor(tail * s)))
    z = np.arange(top + 1, dtype=np.float64)
    w = np.exp(-math.pi * z * z / (s * s))
    cdf = np.cumsum(w)
    return cdf / cdf[-1]


def sample_z_array(rng: RandomStream, s: float, center=0.0, tail: float = 12,
                   size=None) -> np.ndarray:
    """Vectorised D_{Z,s,c}: one independent sample per entry of ``center``.

    ``s`` is a scalar shared by all entries.
    """
    if not s > 0:
        raise ValueError("Gaussian parameter must be positive")
    c = np.asarray(center, dtype=np.float64)
    if size is not None:
        c = np.broadcast_to(c, size)
    shape = c.shape
    c = c.ravel()
    base = np.floor(c)
    frac = c - base
    cdf = _half_cdf(float(s), float(tail))
    out = np.zeros(c.size, dtype=np.int64)
    pending = np.arange(c.size)
    bound = tail * s
    inv = math.pi / (s * s)
    tries = 0
    while pending.size:
        tries += 1
        if tries > MAX_REJECTIONS:
            raise InternalSamplerFailure(f"no acceptance after {MAX_REJECTIONS} rounds (s={s})")
        P = pending.size
        z0 = np.searchsorted(cdf, rng.random(P), side="right")
        b = rng.integers(0, 2, P)
        z = b + (2 * b - 1) * z0
        f = frac[pending]
        log_acc = -inv * (z - f) ** 2 + inv * z0 * z0
        ok = (np.log(rng.random(P)) < log_acc) & (np.abs(z - f) <= bound)
        idx = pending[ok]
        out[idx] = z[ok] + base[idx].astype(np.int64)
        pending = pending[~ok]
    return out.reshape(shape)


def sample_z(p: GaussParams, rng: RandomStream) -> int:
    return int(sample_z_array(rng, p.s, p.c, p.tail, size=()))


def sample_ring_vector(dim: int, s: float, n: int, rng: RandomStream, tail: float = 12) -> np.ndarray:
    """Coefficient-wise D_{Z,s} over R^dim; returns an int64 array (dim, n)."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return sample_z_array(rng, s, 0.0, tail, size=(dim, n))


def smoothing_parameter(eps: float = 2.0**-64, dim: int = 1) -> float:
    """Upper bound on eta_eps(Z^dim) in the width convention."""
    return math.sqrt(math.log(2 * dim * (1 + 1 / eps)) / math.pi)


def exact_moments(s: float, c: float = 0.0, radius: int | None = None) -> tuple[float, float]:
    """Mean and variance of D_{Z,s,c} by direct summation."""
    if radius is None:
        radius = int(math.ceil(12 * s)) + 1
    lo = int(math.floor(c)) - radius
    x = np.arange(lo, lo + 2 * radius + 2, dtype=np.float64)
    w = np.exp(-math.pi * (x - c) ** 2 / (s * s))
    w /= w.sum()
    mean = float((w * x).sum())
    return mean, float((w * (x - mean) ** 2).sum())
