"""Named parameter sets and the closed-form size formulas.

Each set stores q, n, the module rank l and the Gaussian widths. The gadget
length m = ceil(log2 q) and the total width k = l(m + 2) are derived.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

GADGET_BASE = 2
DEFAULT_ROUNDS = 137


class ParamError(ValueError):
    pass


class UnknownSet(ParamError):
    pass


class ConsistencyFailure(ParamError):
    pass


def _is_prime(x: int) -> bool:
    if x < 2:
        return False
    # deterministic Miller-Rabin for x < 3.3e24
    d, r = x - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41):
        if a % x == 0:
            continue
        y = pow(a, d, x)
        if y in (1, x - 1):
            continue
        for _ in range(r - 1):
            y = y * y % x
            if y == x - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class ParamSet:
    name: str
    q: int
    n: int
    l: int
    beta: float
    chi: float
    alpha: float
    t: int
    rounds: int = DEFAULT_ROUNDS

    @property
    def m(self) -> int:
        """Gadget length, ceil(log2 q)."""
        return math.ceil(math.log2(self.q))

    @property
    def k(self) -> int:
        return self.l * (self.m + 2)

    @property
    def qbits(self) -> int:
        return math.ceil(math.log2(self.q))

    @property
    def sig_bound(self) -> float:
        """Static verifier bound on ||sigma2||: t * chi * sqrt(k n)."""
        return self.t * self.chi * math.sqrt(self.k * self.n)

    @property
    def secret_bound(self) -> float:
        """Tail bound on ||v|| for v ~ D_{R^k, beta}."""
        return self.t * self.beta * math.sqrt(self.k * self.n)

    @property
    def forgery_gamma(self) -> float:
        """Module-SIS bound 2 t chi sqrt(k n) of the unforgeability argument."""
        return 2 * self.sig_bound

    @property
    def short_bits(self) -> int:
        """Packed width of signature short vectors, ceil(log2(2 t chi sqrt(kn)))."""
        return math.ceil(math.log2(2 * self.sig_bound))

    @property
    def trapdoor_bits(self) -> int:
        """Width from the size formula for T, ceil(log2(2 beta sqrt(2 n l^2 m)))."""
        return math.ceil(math.log2(2 * self.beta * math.sqrt(2 * self.n * self.l**2 * self.m)))

    def validate(self) -> "ParamSet":
        q, n = self.q, self.n
        if n < 2 or n & (n - 1):
            raise ConsistencyFailure(f"{self.name}: n={n} is not a power of two")
        if not _is_prime(q):
            raise ConsistencyFailure(f"{self.name}: q={q} is not prime")
        if (q - 1) % (2 * n):
            raise ConsistencyFailure(f"{self.name}: 2n does not divide q-1")
        if self.l < 1:
            raise ConsistencyFailure(f"{self.name}: module rank must be >= 1")
        if self.k != self.l * (self.m + 2):
            raise ConsistencyFailure(f"{self.name}: k != l(m+2)")
        if not (self.chi > self.alpha >= self.beta > 0):
            raise ConsistencyFailure(f"{self.name}: need chi > alpha >= beta > 0")
        if self.t < 1 or self.rounds < 1:
            raise ConsistencyFailure(f"{self.name}: t and rounds must be >= 1")
        return self

    def with_rounds(self, rounds: int) -> "ParamSet":
        return ParamSet(self.name, self.q, self.n, self.l, self.beta, self.chi,
                        self.alpha, self.t, rounds).validate()

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(m=self.m, k=self.k, sig_bound=self.sig_bound)
        return d


# T0 is a desk-scale set for oracle tests. chi is chosen so that
# chi^2 > alpha^2 (1 + s1(T)^2) with s1(T) ~ 45 for beta = 4, n = 16, l = 2.
_TABLE = {
    "I": ParamSet("I", 1073707009, 1024, 1, 7.00, 83832.0, 48.34, 12),
    "II": ParamSet("II", 1073707009, 512, 2, 7.00, 83832.0, 48.34, 12),
    "III": ParamSet("III", 1073707009, 256, 4, 7.00, 83832.0, 48.34, 12),
    "IV": ParamSet("IV", 1073738753, 256, 4, 7.00, 83832.0, 48.34, 12),
    "V": ParamSet("V", 1073738753, 256, 5, 5.55, 83290.0, 54.35, 14),
    "T0": ParamSet("T0", 7681, 16, 2, 4.0, 1600.0, 20.0, 12),
}

SET_NAMES = tuple(_TABLE)
SET_IDS = {"T0": 0, "I": 1, "II": 2, "III": 3, "IV": 4, "V": 5}


def load_paramset(name: str, rounds: int | None = None) -> ParamSet:
    try:
        p = _TABLE[name]
    except KeyError:
        raise UnknownSet(f"unknown parameter set {name!r}; choose from {', '.join(SET_NAMES)}") from None
    p.validate()
    return p.with_rounds(rounds) if rounds is not None else p


def paramset_by_id(set_id: int) -> ParamSet:
    for name, i in SET_IDS.items():
        if i == set_id:
            return load_paramset(name)
    raise UnknownSet(f"unknown parameter set id {set_id}")


@dataclass(frozen=True)
class SizeReport:
    """Bit counts from the closed-form size formulas."""
    A: int
    H: int
    PK: int
    T: int
    v: int
    SK: int
    sigma1: int
    sigma2: int
    sigma3: int
    sigma: int

    def kib(self) -> dict:
        return {k: v / 8 / 1024 for k, v in asdict(self).items()}


def theoretical_sizes(p: ParamSet) -> SizeReport:
    n, l, k, m, lq = p.n, p.l, p.k, p.m, p.qbits
    A = n * l * k * lq
    H = n * l * lq
    T = 2 * l * l * m * n * p.trapdoor_bits
    v = n * l * (m + 2) * lq
    s1 = n * l * lq
    s2 = n * k * p.short_bits
    return SizeReport(A=A, H=H, PK=A + H, T=T, v=v, SK=T + v,
                      sigma1=s1, sigma2=s2, sigma3=s1, sigma=2 * s1 + s2)


# Reference artefact sizes (KB) of an earlier C implementation, for comparison.
REFERENCE_COMM_KB = {
    "I": {"A": 124, "H": 4, "PK": 128, "T": 240, "v": 124, "SK": 364, "sigma": 136},
    "II": {"A": 25, "H": 4, "PK": 29, "T": 480, "v": 124, "SK": 604, "sigma": 136},
    "III": {"A": 496, "H": 4, "PK": 500, "T": 960, "v": 124, "SK": 1084, "sigma": 136},
    "IV": {"A": 496, "H": 4, "PK": 500, "T": 960, "v": 124, "SK": 1084, "sigma": 136},
    "V": {"A": 775, "H": 5, "PK": 780, "T": 1500, "v": 124, "SK": 1624, "sigma": 170},
}

# Reference timings (ms) of the same implementation: keygen, sign, verification.
REFERENCE_TIMING_MS = {
    "I": (44.29, 25.12, 7.86),
    "II": (49.39, 34.35, 8.31),
    "III": (109.45, 49.87, 8.93),
    "IV": (95.21, 51.00, 8.18),
    "V": (153.13, 72.19, 10.41),
}
