"""Arithmetic in R_q = Z_q[X]/(X^n + 1) and in R = Z[X]/(X^n + 1).

Ring vectors and matrices are plain int64 arrays whose last axis holds the n
coefficients: a vector in R_q^k has shape (k, n), a matrix in R_q^{r x c} has
shape (r, c, n). Values are stored canonically in [0, q); centering happens
only when computing norms or encoding short vectors.

The forward NTT evaluates a polynomial at the odd powers psi^(2i+1) of a
primitive 2n-th root of unity psi, so a constant polynomial maps to a vector
with every slot equal to that constant. The 1/n factor lives in the inverse.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class RingError(ValueError):
    pass


class NoRootOfUnity(RingError):
    pass


class DimMismatch(RingError):
    pass


class DomainMismatch(RingError):
    pass


class Unsolvable(RingError):
    pass


def _prime_factors(x: int) -> list[int]:
    out, f = [], 2
    while f * f <= x:
        if x % f == 0:
            out.append(f)
            while x % f == 0:
                x //= f
        f += 1
    if x > 1:
        out.append(x)
    return out


def _primitive_root_2n(q: int, n: int) -> int:
    if (q - 1) % (2 * n):
        raise NoRootOfUnity(f"2n={2 * n} does not divide q-1 for q={q}")
    factors = _prime_factors(q - 1)
    for g in range(2, q):
        if all(pow(g, (q - 1) // f, q) != 1 for f in factors):
            return pow(g, (q - 1) // (2 * n), q)
    raise NoRootOfUnity(f"no generator found mod {q}")


def _bitrev(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


class Ring:
    """NTT tables and vectorised arithmetic for one (q, n) pair."""

    def __init__(self, q: int, n: int):
        if n < 2 or n & (n - 1):
            raise RingError("n must be a power of two")
        if q >= 1 << 31:
            raise RingError("q must fit in 31 bits for int64 products")
        self.q, self.n = q, n
        psi = _primitive_root_2n(q, n)
        self.psi = psi
        psi_inv = pow(psi, -1, q)
        self._tw = np.array([pow(psi, i, q) for i in range(n)], dtype=np.int64)
        self._tw_inv = np.array([pow(psi_inv, i, q) * pow(n, -1, q) % q for i in range(n)],
                                dtype=np.int64)
        self._rev = _bitrev(n)
        self._stages = self._stage_twiddles(psi * psi % q)
        self._stages_inv = self._stage_twiddles(pow(psi * psi, -1, q))
        # small rings: one exact int64 matrix product beats log2(n) butterfly passes
        self._dense = None
        if n <= 64 and n * (q - 1) ** 2 < 1 << 62:
            e = np.outer(np.arange(n), 2 * np.arange(n) + 1) % (2 * n)
            pw = np.array([pow(psi, i, q) for i in range(2 * n)], dtype=np.int64)
            n_inv = pow(n, -1, q)
            fwd = pw[e]
            inv = pw[(-e) % (2 * n)].T * n_inv % q
            self._dense = (fwd, inv)

    def _stage_twiddles(self, omega: int) -> list[np.ndarray]:
        q, n, out, h = self.q, self.n, [], 1
        while h < n:
            w = pow(omega, n // (2 * h), q)
            out.append(np.array([pow(w, j, q) for j in range(h)], dtype=np.int64))
            h *= 2
        return out

    def _cyclic(self, a: np.ndarray, stages) -> np.ndarray:
        q, n = self.q, self.n
        lead = a.shape[:-1]
        a = a[..., self._rev]
        h = 1
        for w in stages:
            a = a.reshape(*lead, n // (2 * h), 2, h)
            u = a[..., 0, :]
            v = a[..., 1, :] * w % q
            a = np.stack(((u + v) % q, (u - v) % q), axis=-2)
            h *= 2
        return a.reshape(*lead, n)

    # -- transforms -------------------------------------------------------

    def ntt(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64) % self.q
        if a.shape[-1] != self.n:
            raise DimMismatch(f"last axis {a.shape[-1]} != n={self.n}")
        if self._dense is not None:
            return a @ self._dense[0] % self.q
        return self._cyclic(a * self._tw % self.q, self._stages)

    def intt(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64) % self.q
        if self._dense is not None:
            return a @ self._dense[1] % self.q
        return self._cyclic(a, self._stages_inv) * self._tw_inv % self.q

    # -- arithmetic (coefficient domain in, coefficient domain out) -------

    def reduce(self, a) -> np.ndarray:
        return np.asarray(a, dtype=np.int64) % self.q

    def center(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64) % self.q
        return np.where(a > self.q // 2, a - self.q, a)

    def mul(self, a, b) -> np.ndarray:
        return self.intt(self.ntt(a) * self.ntt(b) % self.q)

    def matvec(self, M, v, M_hat: np.ndarray | None = None) -> np.ndarray:
        """M (r, c, n) times v (..., c, n) -> (..., r, n), mod q."""
        M = np.asarray(M)
        v = np.asarray(v)
        if M.ndim != 3 or v.ndim < 2 or M.shape[1] != v.shape[-2]:
            raise DimMismatch(f"cannot apply {M.shape} to {v.shape}")
        if M_hat is None:
            M_hat = self.ntt(M)
        v_hat = self.ntt(v)
        prod = M_hat * v_hat[..., None, :, :] % self.q
        return self.intt(prod.sum(axis=-2) % self.q)

    def matmul(self, A, B) -> np.ndarray:
        """A (r, c, n) times B (c, s, n) -> (r, s, n), mod q."""
        A, B = np.asarray(A), np.asarray(B)
        if A.ndim != 3 or B.ndim != 3 or A.shape[1] != B.shape[0]:
            raise DimMismatch(f"cannot multiply {A.shape} by {B.shape}")
        Ah, Bh = self.ntt(A), self.ntt(B)
        prod = Ah[:, :, None, :] * Bh[None, :, :, :] % self.q
        return self.intt(prod.sum(axis=1) % self.q)

    def add(self, a, b) -> np.ndarray:
        a, b = np.asarray(a), np.asarray(b)
        if a.shape != b.shape:
            raise DimMismatch(f"{a.shape} vs {b.shape}")
        return (a + b) % self.q

    def sub(self, a, b) -> np.ndarray:
        a, b = np.asarray(a), np.asarray(b)
        if a.shape != b.shape:
            raise DimMismatch(f"{a.shape} vs {b.shape}")
        return (a - b) % self.q

    def identity(self, size: int) -> np.ndarray:
        out = np.zeros((size, size, self.n), dtype=np.int64)
        out[np.arange(size), np.arange(size), 0] = 1
        return out

    # -- linear algebra per NTT slot ---------------------------------------

    def solve_underdetermined(self, M, target) -> np.ndarray:
        """Return some x with M x = target (mod q); free variables set to 0.

        Each NTT slot is an independent system over Z_q, solved by Gaussian
        elimination. Raises Unsolvable if some slot is inconsistent.
        """
        q = self.q
        M = np.asarray(M)
        target = np.asarray(target)
        rows, cols, n = M.shape
        if target.shape != (rows, n):
            raise DimMismatch(f"target {target.shape} does not match {M.shape}")
        Mh = self.ntt(M)
        th = self.ntt(target)
        xh = np.zeros((cols, n), dtype=np.int64)
        for s in range(n):
            aug = np.concatenate([Mh[:, :, s], th[:, s, None]], axis=1).astype(object)
            pivots = []
            r = 0
            for c in range(cols):
                if r == rows:
                    break
                nz = [i for i in range(r, rows) if aug[i, c] % q]
                if not nz:
                    continue
                p = nz[0]
                aug[[r, p]] = aug[[p, r]]
                aug[r] = aug[r] * pow(int(aug[r, c]), -1, q) % q
                for i in range(rows):
                    if i != r and aug[i, c] % q:
                        aug[i] = (aug[i] - aug[i, c] * aug[r]) % q
                pivots.append(c)
                r += 1
            if any(aug[i, cols] % q for i in range(r, rows)):
                raise Unsolvable(f"inconsistent system in NTT slot {s}")
            for i, c in enumerate(pivots):
                xh[c, s] = int(aug[i, cols])
        return self.intt(xh)

    def invert_matrix(self, M) -> np.ndarray:
        """Inverse of a square ring matrix, or RingError if singular in some slot."""
        q = self.q
        M = np.asarray(M)
        size = M.shape[0]
        if M.shape[:2] != (size, size):
            raise DimMismatch("matrix must be square")
        Mh = self.ntt(M)
        out = np.zeros_like(Mh)
        for s in range(self.n):
            aug = np.concatenate([Mh[:, :, s], np.eye(size, dtype=np.int64)], axis=1).astype(object)
            for c in range(size):
                nz = [i for i in range(c, size) if aug[i, c] % q]
                if not nz:
                    raise RingError(f"matrix singular in NTT slot {s}")
                p = nz[0]
                aug[[c, p]] = aug[[p, c]]
                aug[c] = aug[c] * pow(int(aug[c, c]), -1, q) % q
                for i in range(size):
                    if i != c and aug[i, c] % q:
                        aug[i] = (aug[i] - aug[i, c] * aug[c]) % q
            out[:, :, s] = aug[:, size:].astype(np.int64)
        return self.intt(out)


@lru_cache(maxsize=None)
def get_ring(q: int, n: int) -> Ring:
    return Ring(q, n)


# -- exact products over R (no modulus) -----------------------------------

@lru_cache(maxsize=None)
def _twist(n: int) -> np.ndarray:
    return np.exp(-1j * np.pi * np.arange(n) / n)


def fft_embed(a) -> np.ndarray:
    """Evaluate real polynomials at the 2n-th roots exp(-i pi (2j+1)/n)."""
    a = np.asarray(a, dtype=np.float64)
    return np.fft.fft(a * _twist(a.shape[-1]), axis=-1)


def fft_unembed(a_hat) -> np.ndarray:
    n = a_hat.shape[-1]
    return (np.fft.ifft(a_hat, axis=-1) * np.conj(_twist(n))).real


def int_matvec(M, v, M_hat: np.ndarray | None = None) -> np.ndarray:
    """Exact M v over R for short integer operands.

    Uses a float64 FFT and rounds; exact as long as the true coefficients
    stay far below 2^50, which holds for every trapdoor/Gaussian product here.
    """
    if M_hat is None:
        M_hat = fft_embed(M)
    v_hat = fft_embed(v)
    out = fft_unembed(np.einsum("rcn,...cn->...rn", M_hat, v_hat))
    return np.rint(out).astype(np.int64)


def euclidean_norm(v, q: int | None = None) -> float:
    """Euclidean norm over all coefficients.

    With q given, each coefficient is first centered into [-q/2, q/2].
    """
    v = np.asarray(v, dtype=np.int64)
    if q is not None:
        v = v % q
        v = np.where(v > q // 2, v - q, v)
    return float(np.sqrt(np.sum(v.astype(np.float64) ** 2)))


def max_column_norm(T) -> float:
    """max_j ||T[:, j]|| for a ring matrix of shape (r, c, n)."""
    T = np.asarray(T, dtype=np.float64)
    return float(np.sqrt((T ** 2).sum(axis=(0, 2))).max())


# -- single ring elements with a domain tag --------------------------------

COEFF = "coeff"
NTT = "ntt"


@dataclass(frozen=True)
class RingElem:
    """One element of R_q, tagged with the domain its coefficients live in."""
    coeffs: np.ndarray
    ring: Ring
    domain: str = COEFF

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.int64)
        if c.shape != (self.ring.n,):
            raise DimMismatch(f"expected {self.ring.n} coefficients, got {c.shape}")
        if self.domain not in (COEFF, NTT):
            raise ValueError(f"bad domain {self.domain!r}")
        object.__setattr__(self, "coeffs", c % self.ring.q)

    def _check(self, other: "RingElem"):
        if other.ring is not self.ring:
            raise RingError("operands from different rings")
        if other.domain != self.domain:
            raise DomainMismatch(f"{self.domain} vs {other.domain}")

    def __add__(self, other):
        self._check(other)
        return RingElem(self.coeffs + other.coeffs, self.ring, self.domain)

    def __sub__(self, other):
        self._check(other)
        return RingElem(self.coeffs - other.coeffs, self.ring, self.domain)

    def __mul__(self, other):
        self._check(other)
        if self.domain == NTT:
            return RingElem(self.coeffs * other.coeffs, self.ring, NTT)
        return RingElem(self.ring.mul(self.coeffs, other.coeffs), self.ring)

    def __eq__(self, other):
        return (isinstance(other, RingElem) and other.ring is self.ring
                and other.domain == self.domain and np.array_equal(self.coeffs, other.coeffs))

    __hash__ = None

    def to_ntt(self) -> "RingElem":
        if self.domain != COEFF:
            raise DomainMismatch("already in NTT domain")
        return RingElem(self.ring.ntt(self.coeffs), self.ring, NTT)

    def from_ntt(self) -> "RingElem":
        if self.domain != NTT:
            raise DomainMismatch("not in NTT domain")
        return RingElem(self.ring.intt(self.coeffs), self.ring, COEFF)


def ntt_forward(x: RingElem) -> RingElem:
    return x.to_ntt()


def ntt_inverse(x: RingElem) -> RingElem:
    return x.from_ntt()
