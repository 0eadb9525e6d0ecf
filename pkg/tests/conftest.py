import numpy as np
import pytest

from mlus.gaussian import make_rng
from mlus.params import load_paramset
from mlus.scheme import ml_keygen, ml_sign


@pytest.fixture(scope="session")
def t0():
    return load_paramset("T0")


@pytest.fixture
def rng():
    return make_rng(b"unit-tests")


@pytest.fixture(scope="session")
def t0_keys(t0):
    return ml_keygen(t0, make_rng(b"t0-keys"))


@pytest.fixture(scope="session")
def t0_signed(t0, t0_keys):
    pk, sk = t0_keys
    msg = b"fixture message"
    return msg, ml_sign(msg, sk, pk, t0, make_rng(b"t0-sig"))


def ring_poly(coeffs, n):
    out = np.zeros(n, dtype=np.int64)
    out[: len(coeffs)] = coeffs
    return out
