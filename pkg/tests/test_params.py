import math

import pytest

from mlus.codec import encoded_sizes
from mlus.params import (SET_IDS, ConsistencyFailure, ParamSet, UnknownSet, load_paramset,
                         paramset_by_id, theoretical_sizes)


def test_set_I_values():
    p = load_paramset("I")
    assert (p.q, p.n, p.l, p.m, p.k) == (1073707009, 1024, 1, 30, 32)
    assert (p.beta, p.chi, p.alpha, p.t) == (7.00, 83832.0, 48.34, 12)


def test_set_V_values():
    p = load_paramset("V")
    assert (p.q, p.n, p.l, p.m, p.k) == (1073738753, 256, 5, 30, 160)
    assert (p.beta, p.chi, p.alpha, p.t) == (5.55, 83290.0, 54.35, 14)


def test_toy_set_values():
    p = load_paramset("T0")
    assert (p.q, p.n, p.l, p.m, p.k) == (7681, 16, 2, 13, 30)
    assert (p.q - 1) % (2 * p.n) == 0


@pytest.mark.parametrize("name", ["I", "II", "III", "IV", "V", "T0"])
def test_every_set_validates(name):
    p = load_paramset(name)
    assert p.k == p.l * (p.m + 2)
    assert p.m == math.ceil(math.log2(p.q))
    assert paramset_by_id(SET_IDS[name]) == p


def test_unknown_set():
    with pytest.raises(UnknownSet):
        load_paramset("VI")


@pytest.mark.parametrize("bad", [
    dict(q=7681, n=12),            # n not a power of two
    dict(q=7683, n=16),            # composite
    dict(q=7681, n=1024),          # 2n does not divide q-1
    dict(q=7681, n=16, chi=10.0),  # chi < alpha
    dict(q=7681, n=16, t=0),
])
def test_inconsistent_sets_rejected(bad):
    d = dict(name="X", q=7681, n=16, l=2, beta=4.0, chi=1600.0, alpha=20.0, t=12)
    d.update(bad)
    with pytest.raises(ConsistencyFailure):
        ParamSet(**d).validate()


def test_rounds_override():
    assert load_paramset("T0", rounds=5).rounds == 5
    assert load_paramset("T0").rounds == 137


def test_public_key_size_formula_set_I():
    p = load_paramset("I")
    assert theoretical_sizes(p).PK == p.n * p.l * (p.k + 1) * 30 == 1013760


def test_toy_signature_vector_size():
    # 2 t chi sqrt(kn) = 2*12*1600*sqrt(480) = 841301.8..., ceil(log2) = 20
    s = theoretical_sizes(load_paramset("T0"))
    assert s.sigma2 == 16 * 30 * 20 == 9600
    assert s.sigma == 2 * 16 * 2 * 13 + 9600


def test_trapdoor_size_doubles_with_rank_at_fixed_nl():
    sets = [load_paramset(n) for n in ("I", "II", "III")]
    enc = [encoded_sizes(p)["T"] for p in sets]
    assert enc[1] == 2 * enc[0] and enc[2] == 2 * enc[1]
    theo = [theoretical_sizes(p).T for p in sets]
    assert theo[0] < theo[1] < theo[2]
