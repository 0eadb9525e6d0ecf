import math

import numpy as np

from mlus.gaussian import make_rng
from mlus.oracles import (binomial_band, exact_gauss_pmf, exact_gauss_variance, exact_norm,
                          negacyclic_matrix, schoolbook_matvec, schoolbook_mul)


def test_schoolbook_wraps_negatively():
    n, q = 16, 7681
    x = [0] * n
    x[1] = 1
    y = [0] * n
    y[n - 1] = 1
    assert schoolbook_mul(x, y, n, q) == [q - 1] + [0] * (n - 1)


def test_schoolbook_zero_operand():
    rng = np.random.default_rng(0)
    assert schoolbook_mul(rng.integers(0, 97, 8), [0] * 8, 8, 97) == [0] * 8


def test_schoolbook_matvec_matches_negacyclic_matrix():
    rng = np.random.default_rng(1)
    q, n = 97, 8
    M = rng.integers(0, q, (2, 3, n))
    v = rng.integers(0, q, (3, n))
    ref = sum(negacyclic_matrix(M[0, c]) @ v[c] for c in range(3))
    assert np.array_equal(schoolbook_matvec(M, v, q)[0], np.round(ref).astype(np.int64) % q)


def test_exact_pmf_sums_to_one_and_is_symmetric():
    x, w = exact_gauss_pmf(4.0, 0.0, -40, 40)
    assert math.isclose(w.sum(), 1.0, rel_tol=1e-12)
    assert np.allclose(w, w[::-1])


def test_exact_variance_near_continuous_for_wide_gaussian():
    s = 20.0
    assert math.isclose(exact_gauss_variance(s), s * s / (2 * math.pi), rel_tol=1e-9)


def test_exact_norm_centres():
    assert exact_norm([3, 4]) == 5.0
    assert exact_norm([10, 4], q=13) == 5.0


def test_binomial_band_contains_p():
    lo, hi = binomial_band(0.5, 100)
    assert lo < 0.5 < hi and math.isclose(hi - lo, 0.3)


def test_rng_is_reproducible():
    assert make_rng(b"x").bytes(16) == make_rng(b"x").bytes(16)
