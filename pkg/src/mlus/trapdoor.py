"""Module gadget trapdoors: generation and Gaussian preimage sampling.

Layout conventions (ring arrays, last axis = n coefficients):

* G = I_l (x) [1, 2, ..., 2^(m-1)] has shape (l, l*m, n); entry (i, i*m + j)
  is the constant 2^j.
* A = [I_l | B | tag*G - [I_l | B] T] has shape (l, k, n) with k = l(m + 2).
* T has shape (2l, l*m, n) and short integer coefficients.

Preimage sampling follows the perturbation approach: p is drawn with
covariance chi^2 I - alpha^2 [T; I][T; I]^T, the syndrome w - A p is lifted
through the gadget with width alpha, and u = p + [T; I] d is returned, whose
covariance is then chi^2 I regardless of T.

The perturbation is sampled by convolution: a continuous Gaussian with
covariance (chi^2 - r^2) I - alpha^2 [T; I][T; I]^T is rounded coordinate-wise
with D_{Z, r, .}, where r is a smoothing parameter of Z^(kn). The continuous part
is drawn blockwise: the lower (gadget) block is spherical, and the upper block
conditioned on it has covariance a I - c T T^T. In the FFT embedding of R that
covariance splits into n independent 2l x 2l Hermitian blocks, so a batched
Cholesky of small matrices replaces a dense (2ln x 2ln) factorisation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .gaussian import RandomStream, sample_ring_vector, sample_z_array, smoothing_parameter
from .params import GADGET_BASE, ParamSet
from .ring import RingError, fft_embed, fft_unembed, get_ring, int_matvec

SMOOTHING_EPS = 2.0**-64


class TrapdoorError(ValueError):
    pass


class TagNotInvertible(TrapdoorError):
    pass


class AlphaTooSmall(TrapdoorError):
    pass


class CovarianceNotPD(TrapdoorError):
    pass


# -- gadget ----------------------------------------------------------------

def gadget_length(q: int, base: int = GADGET_BASE) -> int:
    m, x = 0, 1
    while x < q:
        x *= base
        m += 1
    return m


def gadget_matrix(l: int, q: int, n: int) -> np.ndarray:
    m = gadget_length(q)
    G = np.zeros((l, l * m, n), dtype=np.int64)
    for i in range(l):
        G[i, i * m:(i + 1) * m, 0] = [(1 << j) % q for j in range(m)]
    return G


def bit_decompose(w: np.ndarray, q: int) -> np.ndarray:
    """Binary decomposition (..., l, n) -> (..., l*m, n) with G x = w."""
    m = gadget_length(q)
    w = np.asarray(w, dtype=np.int64) % q
    bits = (w[..., :, None, :] >> np.arange(m)[:, None]) & 1
    return bits.reshape(*w.shape[:-2], w.shape[-2] * m, w.shape[-1])


def alpha_lower_bound(base: int = GADGET_BASE) -> float:
    """Smallest admissible width for the arbitrary-modulus gadget sampler.

    The sampler runs its inner integer samplers at width alpha / (base + 1),
    which must be at least the smoothing parameter of Z.
    """
    return (base + 1) * smoothing_parameter(SMOOTHING_EPS)


def gadget_sample_int(u, q: int, s: float, rng: RandomStream, tail: float = 12) -> np.ndarray:
    """Sample x ~ D_{Lambda^u(g), s} for g = (1, 2, ..., 2^(m-1)) mod q.

    Vectorised over the entries of ``u``; returns shape u.shape + (m,).
    This is the arbitrary-modulus sampler that factors the basis of
    Lambda(g^T) as (bidiagonal) x (identity plus one dense column).
    """
    b = GADGET_BASE
    m = gadget_length(q)
    if s < alpha_lower_bound(b):
        raise AlphaTooSmall(f"alpha={s} below {alpha_lower_bound(b):.3f}")
    u = np.asarray(u, dtype=np.int64) % q
    shape = u.shape
    u = u.ravel()
    N = u.size
    sigma = s / (b + 1)
    qd = [(q >> i) & 1 for i in range(m)]
    ud = [(u >> i) & 1 for i in range(m)]

    ls = [math.sqrt(b * (1 + 1 / m) + 1)] + [math.sqrt(b * (1 + 1 / (m - i))) for i in range(1, m)]
    hs = [0.0] + [math.sqrt(b * (1 - 1 / (m - i + 1))) for i in range(1, m)]
    d = [qd[0] / b]
    for i in range(1, m):
        d.append((d[-1] + qd[i]) / b)

    # perturbation with the covariance that makes the final output spherical
    # z has covariance sigma^2 M^-1 with M = K^T K, K lower bidiagonal (ls, hs)
    z = np.zeros((m, N), dtype=np.int64)
    for i in range(m):
        centre = -hs[i] * z[i - 1] / ls[i] if i else np.zeros(N)
        z[i] = sample_z_array(rng, sigma / ls[i], centre, tail)
    p = np.empty((m, N), dtype=np.int64)
    if m == 1:
        p[0] = (2 * b + 1) * z[0]
    else:
        p[0] = (2 * b + 1) * z[0] + b * z[1]
        for i in range(1, m - 1):
            p[i] = b * (z[i - 1] + 2 * z[i] + z[i + 1])
        p[m - 1] = b * (z[m - 2] + 2 * z[m - 1])

    c = np.empty((m, N))
    c[0] = (ud[0] - p[0]) / b
    for i in range(1, m):
        c[i] = (c[i - 1] + ud[i] - p[i]) / b

    zz = np.empty((m, N), dtype=np.int64)
    dk = d[m - 1]
    zz[m - 1] = sample_z_array(rng, sigma / dk, -c[m - 1] / dk, tail)
    cc = c[: m - 1] + zz[m - 1][None, :] * np.array(d[: m - 1])[:, None]
    if m > 1:
        zz[: m - 1] = sample_z_array(rng, sigma, -cc, tail)

    t = np.empty((m, N), dtype=np.int64)
    last = zz[m - 1]
    if m == 1:
        t[0] = qd[0] * last + ud[0]
    else:
        t[0] = b * zz[0] + qd[0] * last + ud[0]
        for i in range(1, m - 1):
            t[i] = b * zz[i] - zz[i - 1] + qd[i] * last + ud[i]
        t[m - 1] = qd[m - 1] * last - zz[m - 2] + ud[m - 1]
    return t.T.reshape(*shape, m)


def g_sample(vtarget, alpha: float, q: int, rng: RandomStream, tail: float = 12) -> np.ndarray:
    """d ~ D_{Lambda^v(G), alpha}: (..., l, n) -> (..., l*m, n) with G d = v mod q.

    G has constant integer entries, so the ring problem splits into l*n
    independent integer gadget instances, one per coefficient.
    """
    v = np.asarray(vtarget, dtype=np.int64) % q
    x = gadget_sample_int(v, q, alpha, rng, tail)   # (..., l, n, m)
    x = np.swapaxes(x, -1, -2)                       # (..., l, m, n)
    return x.reshape(*v.shape[:-2], v.shape[-2] * x.shape[-2], v.shape[-1])


# -- perturbation ------------------------------------------------------------

def rounding_width(dim: int) -> float:
    return smoothing_parameter(SMOOTHING_EPS, dim)


def trapdoor_s1(T) -> float:
    """Largest singular value of T's coefficient embedding."""
    T_hat = np.moveaxis(fft_embed(T), -1, 0)
    return float(np.linalg.svd(T_hat, compute_uv=False).max())


class PerturbationSampler:
    """Samples p with covariance chi^2 I - alpha^2 [T; I][T; I]^T over Z^(kn)."""

    def __init__(self, T, chi: float, alpha: float, tail: float = 12):
        T = np.asarray(T, dtype=np.int64)
        self.T = T
        self.top, self.bottom, self.n = T.shape
        self.chi, self.alpha, self.tail = chi, alpha, tail
        self.r = rounding_width((self.top + self.bottom) * self.n)
        a = chi * chi - self.r * self.r
        gap = a - alpha * alpha
        if gap <= 0:
            raise CovarianceNotPD(f"chi={chi} too small for alpha={alpha}")
        self.a, self.gap = a, gap
        self.T_hat = fft_embed(T)                    # (2l, lm, n) complex
        Th = np.moveaxis(self.T_hat, -1, 0)          # (n, 2l, lm)
        TTh = Th @ np.conj(np.swapaxes(Th, -1, -2))  # (n, 2l, 2l)
        cov = a * np.eye(self.top)[None] - (alpha * alpha * a / gap) * TTh
        try:
            self.chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise CovarianceNotPD(
                f"chi={chi} too small for alpha={alpha} and this trapdoor") from None
        if not np.all(np.isfinite(self.chol)):
            raise CovarianceNotPD("non-finite Cholesky factor")

    def continuous(self, rng: RandomStream, size: tuple = ()) -> np.ndarray:
        two_pi = 2 * math.pi
        y2 = rng.normal(0.0, math.sqrt(self.gap / two_pi), (*size, self.bottom, self.n))
        w = rng.normal(0.0, 1.0, (*size, self.top, self.n))
        w_hat = np.einsum("nij,...jn->...in", self.chol, fft_embed(w)) / math.sqrt(two_pi)
        mean_hat = np.einsum("rcn,...cn->...rn", self.T_hat, fft_embed(y2))
        y1 = fft_unembed(w_hat - (self.alpha ** 2 / self.gap) * mean_hat)
        return np.concatenate([y1, y2], axis=-2)

    def sample(self, rng: RandomStream, size: tuple = ()) -> np.ndarray:
        y = self.continuous(rng, size)
        return sample_z_array(rng, self.r, y, self.tail)

    def covariance(self) -> np.ndarray:
        """Target covariance (width convention) as a dense (kn x kn) matrix."""
        from .oracles import negacyclic_matrix
        top, bottom, n = self.top, self.bottom, self.n
        W = np.zeros(((top + bottom) * n, bottom * n))
        for i in range(top):
            for j in range(bottom):
                W[i * n:(i + 1) * n, j * n:(j + 1) * n] = negacyclic_matrix(self.T[i, j])
        W[top * n:, :] = np.eye(bottom * n)
        return self.chi ** 2 * np.eye((top + bottom) * n) - self.alpha ** 2 * W @ W.T


def sample_perturb(T, chi: float, alpha: float, rng: RandomStream, tail: float = 12,
                   size: tuple = ()) -> np.ndarray:
    return PerturbationSampler(T, chi, alpha, tail).sample(rng, size)


def spectral_margin(T, chi: float, alpha: float) -> float:
    """chi^2 - r^2 - alpha^2 (1 + s1(T)^2); positive iff the perturbation exists."""
    T = np.asarray(T)
    r = rounding_width((T.shape[0] + T.shape[1]) * T.shape[2])
    return chi ** 2 - r ** 2 - alpha ** 2 * (1 + trapdoor_s1(T) ** 2)


# -- trapdoor generation and preimage sampling -------------------------------

@dataclass
class TrapdoorKey:
    A: np.ndarray
    T: np.ndarray
    params: ParamSet
    tag: np.ndarray | None = None   # None means the identity
    _perturb: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def ring(self):
        return get_ring(self.params.q, self.params.n)

    @cached_property
    def A_hat(self) -> np.ndarray:
        return self.ring.ntt(self.A)

    @cached_property
    def tag_inv(self) -> np.ndarray | None:
        if self.tag is None:
            return None
        return self.ring.invert_matrix(self.tag)

    def perturbation(self, chi: float, alpha: float) -> PerturbationSampler:
        key = (chi, alpha)
        if key not in self._perturb:
            self._perturb[key] = PerturbationSampler(self.T, chi, alpha, self.params.t)
        return self._perturb[key]

    def stacked(self) -> np.ndarray:
        """[T; I_{lm}] as an integer ring matrix (k, lm, n)."""
        lm, n = self.T.shape[1], self.T.shape[2]
        eye = np.zeros((lm, lm, n), dtype=np.int64)
        eye[np.arange(lm), np.arange(lm), 0] = 1
        return np.concatenate([self.T, eye], axis=0)

    def check_relation(self) -> bool:
        """A [T; I] == tag G (mod q), exactly."""
        p = self.params
        ring = self.ring
        lhs = ring.matmul(self.A, ring.reduce(self.stacked()))
        G = gadget_matrix(p.l, p.q, p.n)
        rhs = G if self.tag is None else ring.matmul(self.tag, G)
        return bool(np.array_equal(lhs, rhs % p.q))


def ml_trapgen(p: ParamSet, rng: RandomStream, tag=None) -> TrapdoorKey:
    ring = get_ring(p.q, p.n)
    l, m, n, q = p.l, p.m, p.n, p.q
    if tag is not None:
        tag = np.asarray(tag, dtype=np.int64) % q
        if tag.shape != (l, l, n):
            raise TrapdoorError(f"tag must have shape {(l, l, n)}")
        try:
            ring.invert_matrix(tag)
        except RingError:
            raise TagNotInvertible("tag matrix is not invertible in R_q") from None
    B = rng.integers(0, q, (l, l, n), dtype=np.int64)
    Bp = np.concatenate([ring.identity(l), B], axis=1)
    T = sample_ring_vector(2 * l * l * m, p.beta, n, rng, p.t).reshape(2 * l, l * m, n)
    G = gadget_matrix(l, q, n)
    LG = G if tag is None else ring.matmul(tag, G)
    right = ring.sub(LG, ring.matmul(Bp, ring.reduce(T)))
    A = np.concatenate([Bp, right], axis=1)
    return TrapdoorKey(A=A, T=T, params=p, tag=tag)


def ml_sample_pre(key: TrapdoorKey, w, chi: float, alpha: float, rng: RandomStream) -> np.ndarray:
    """Short u with A u = w (mod q); w may carry leading batch axes."""
    p = key.params
    ring = key.ring
    w = np.asarray(w, dtype=np.int64) % p.q
    size = w.shape[:-2]
    sampler = key.perturbation(chi, alpha)
    pert = sampler.sample(rng, size)
    v = ring.sub(w, ring.matvec(key.A, pert, key.A_hat))
    if key.tag_inv is not None:
        v = ring.matvec(key.tag_inv, v)
    d = g_sample(v, alpha, p.q, rng, p.t)
    u = pert + np.concatenate([int_matvec(key.T, d, sampler.T_hat), d], axis=-2)
    return u
