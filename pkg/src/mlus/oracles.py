"""Brute-force reference computations and adversarial provers for the test suite.

Nothing here shares an arithmetic path with the code it checks: ring products
are schoolbook over Python integers, Gaussian masses are direct sums, gadget
marginals come from a convolution over residues mod q, and the perturbation
reference uses a dense Cholesky factor of the coefficient-embedding covariance.
"""

from __future__ import annotations

import math

import numpy as np

from .gaussian import RandomStream, sample_ring_vector, smoothing_parameter
from .protocol import (CheckResult, RoundResponse, RoundState, Statement, commit_round, open_round,
                       simulate_commit, verifier_challenge, verifier_check)

# 3-sigma binomial bands and chi^2 at 0.01, used throughout the tests
CHI2_ALPHA = 0.01
BAND_SIGMAS = 3.0


def binomial_band(p: float, trials: int, sigmas: float = BAND_SIGMAS) -> tuple[float, float]:
    half = sigmas * math.sqrt(p * (1 - p) / trials)
    return p - half, p + half


# -- ring ----------------------------------------------------------------------

def schoolbook_mul(x, y, n: int, q: int) -> list[int]:
    """x * y in Z_q[X]/(X^n + 1), O(n^2) with Python integers."""
    out = [0] * n
    for i in range(n):
        xi = int(x[i])
        for j in range(n):
            t = xi * int(y[j])
            if i + j < n:
                out[i + j] += t
            else:
                out[i + j - n] -= t
    return [c % q for c in out]


def schoolbook_matvec(M, v, q: int) -> np.ndarray:
    M, v = np.asarray(M), np.asarray(v)
    rows, cols, n = M.shape
    out = np.zeros((rows, n), dtype=np.int64)
    for r in range(rows):
        acc = [0] * n
        for c in range(cols):
            prod = schoolbook_mul(M[r, c], v[c], n, q)
            acc = [(a + b) % q for a, b in zip(acc, prod)]
        out[r] = acc
    return out


def negacyclic_matrix(a) -> np.ndarray:
    """Real n x n matrix of multiplication by a in Z[X]/(X^n + 1)."""
    a = np.asarray(a, dtype=np.float64)
    n = a.size
    out = np.zeros((n, n))
    for j in range(n):
        col = np.roll(a, j)
        col[:j] *= -1
        out[:, j] = col
    return out


def exact_norm(v, q: int | None = None) -> float:
    total = 0
    for c in np.asarray(v).ravel().tolist():
        c = int(c)
        if q is not None:
            c %= q
            if c > q // 2:
                c -= q
        total += c * c
    return math.sqrt(total)


# -- Gaussians -----------------------------------------------------------------

def exact_gauss_pmf(s: float, c: float, lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
    """Support [lo, hi] and probabilities of D_{Z,s,c} restricted to it."""
    x = np.arange(lo, hi + 1)
    w = np.array([math.exp(-math.pi * (int(t) - c) ** 2 / (s * s)) for t in x])
    return x, w / math.fsum(w)


def exact_gauss_variance(s: float, c: float = 0.0, radius: int | None = None) -> float:
    radius = radius if radius is not None else int(math.ceil(12 * s))
    x, w = exact_gauss_pmf(s, c, int(math.floor(c)) - radius, int(math.floor(c)) + radius + 1)
    mean = math.fsum(w * x)
    return math.fsum(w * (x - mean) ** 2)


def gadget_marginals(u: int, q: int, s: float, window: float = 4.0):
    """Exact marginals of D_{Lambda^u(g), s}, g = (1, 2, ..., 2^(m-1)).

    For each coordinate i, f_i(r) = sum of rho_s(x) over x with 2^i x = r (mod q);
    the coset mass is the cyclic convolution of all f_i at u, and the marginal
    of x_i at a is rho_s(a) times the convolution of the other f_j at u - 2^i a.
    Returns (support, probability rows of shape (m, len(support))).
    """
    m = (q - 1).bit_length()
    W = int(math.ceil(window * s))
    xs = np.arange(-W, W + 1)
    rho = np.exp(-math.pi * xs.astype(np.float64) ** 2 / (s * s))
    spectra = []
    for i in range(m):
        f = np.zeros(q)
        np.add.at(f, (xs * (1 << i)) % q, rho)
        spectra.append(np.fft.rfft(f))
    total = np.prod(spectra, axis=0)
    rows = np.zeros((m, xs.size))
    for i in range(m):
        rest = np.fft.irfft(total / spectra[i], n=q) if np.all(np.abs(spectra[i]) > 1e-9) else \
            np.fft.irfft(np.prod([spectra[j] for j in range(m) if j != i], axis=0), n=q)
        mass = rho * rest[(u - xs * (1 << i)) % q]
        rows[i] = np.clip(mass, 0, None) / np.clip(mass, 0, None).sum()
    return xs, rows


def dense_perturbation(T, chi: float, alpha: float, rng: RandomStream, count: int,
                       r: float | None = None) -> np.ndarray:
    """Reference perturbation sampler: dense Cholesky of the continuous part, then
    coordinate-wise rounding with width r. Returns (count, k, n)."""
    from .gaussian import sample_z_array
    T = np.asarray(T)
    top, bottom, n = T.shape
    dim = (top + bottom) * n
    r = smoothing_parameter(2.0 ** -64, dim) if r is None else r
    W = np.zeros((dim, bottom * n))
    for i in range(top):
        for j in range(bottom):
            W[i * n:(i + 1) * n, j * n:(j + 1) * n] = negacyclic_matrix(T[i, j])
    W[top * n:, :] = np.eye(bottom * n)
    cov = (chi ** 2 - r ** 2) * np.eye(dim) - alpha ** 2 * W @ W.T
    C = np.linalg.cholesky(cov / (2 * math.pi))
    y = rng.normal(size=(count, dim)) @ C.T
    return sample_z_array(rng, r, y).reshape(count, top + bottom, n)


# -- adversarial provers -------------------------------------------------------

class SimulatingProver:
    """Prover without the secret: each round it builds the simulator's
    commitments for a random (or fixed) dodged challenge and answers what it can."""

    def __init__(self, q: int, guess: int | None = None):
        self.q, self.guess = q, guess

    def commit(self, st: Statement, rng: RandomStream, zero_nonces: bool = False) -> RoundState:
        g = self.guess if self.guess is not None else int(rng.integers(0, 3))
        return simulate_commit(st, g, rng, zero_nonces)

    def respond(self, state: RoundState, ch: int) -> RoundResponse:
        return open_round(state, ch, self.q)


class Ch0OnlyProver:
    """Knows some short vector but not v: comm1 is garbage, so only ch=0 is answered
    in a way consistent with confirmation."""

    def __init__(self, q: int):
        self.q = q

    def commit(self, st, rng, zero_nonces=False):
        p = st.p
        fake = sample_ring_vector(p.k, p.beta, p.n, rng, p.t)
        junk = rng.integers(0, p.q, (p.l, p.n), dtype=np.int64)
        return commit_round(st, fake, rng, zero_nonces, comm1_value=junk)

    def respond(self, state, ch):
        return open_round(state, ch, self.q)


class FixedWitnessProver:
    """Signer that swaps in a short v' != v and sends j = M e (no adaptation)."""

    def __init__(self, q: int):
        self.q = q

    def commit(self, st, rng, zero_nonces=False):
        p = st.p
        fake = sample_ring_vector(p.k, p.beta, p.n, rng, p.t)
        state = commit_round(st, fake, rng, zero_nonces)
        state.j = st.M_times(state.e)
        return state

    def respond(self, state, ch):
        return open_round(state, ch, self.q)


class AdaptiveWitnessProver(FixedWitnessProver):
    """Short v' != v with j = M(v' + e) - sigma3: passes the sigma3 gate for any token."""

    def commit(self, st, rng, zero_nonces=False):
        p = st.p
        return commit_round(st, sample_ring_vector(p.k, p.beta, p.n, rng, p.t), rng, zero_nonces)


def make_prover(strategy: str, q: int, sk=None):
    from .protocol import HonestProver
    if strategy == "honest":
        if sk is None:
            raise ValueError("honest prover needs the secret key")
        return HonestProver(sk)
    if strategy == "simulator":
        return SimulatingProver(q)
    if strategy == "ch0_only":
        return Ch0OnlyProver(q)
    if strategy == "fixed_witness":
        return FixedWitnessProver(q)
    if strategy == "adaptive_witness":
        return AdaptiveWitnessProver(q)
    raise ValueError(f"unknown strategy {strategy!r}")


def cheating_prover_round(st: Statement, prover, rng: RandomStream) -> tuple[bool, CheckResult]:
    """One round against a fresh verifier challenge; accepted means the round
    passed and, for ch=1, gave confirmation evidence."""
    state = prover.commit(st, rng)
    ch = verifier_challenge(rng)
    resp = prover.respond(state, ch)
    res = verifier_check(state.comms, ch, resp, None, None, None, None, st.p, statement=st)
    return res.ok and res.evidence != "disavow", res
