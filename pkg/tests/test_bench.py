import json
import time

from mlus.bench import EXCLUDED_ENTRIES, MIN_ITERS, bench_run, cpu_hz, size_comparison
from mlus.gaussian import make_rng
from mlus.params import load_paramset


def test_bench_report_fields(t0):
    rep = bench_run(t0, 1, make_rng(b"bench"))
    d = json.loads(json.dumps(rep.to_dict()))
    assert d["iterations"] == MIN_ITERS
    assert set(d["timings"]) == {"keygen", "sign", "verify_static"}
    for t in d["timings"].values():
        assert t["min_ms"] <= t["median_ms"] <= t["max_ms"] and t["cycles_est"] > 0
    assert d["reference_ms"] is None and "machine" in d


def test_cpu_hz_positive():
    hz, src = cpu_hz()
    assert hz > 0 and src in ("/proc/cpuinfo", "nominal")


def test_size_comparison_marks_exclusions():
    sizes = size_comparison(load_paramset("II"))
    assert sizes["PK"]["excluded"] and sizes["A"]["excluded"]
    assert not sizes["SK"]["excluded"]
    assert ("II", "PK") in EXCLUDED_ENTRIES


def test_t0_pipeline_fast(t0):
    from mlus.protocol import HonestProver, SignerEndpoint, Verdict, VerifierEndpoint, run_protocol
    from mlus.scheme import ml_keygen, ml_sign, verify_static
    rng = make_rng(b"speed")
    start = time.perf_counter()
    pk, sk = ml_keygen(t0, rng)
    sig = ml_sign(b"m", sk, pk, t0, rng)
    assert verify_static(b"m", sig, pk, t0)
    v = run_protocol(SignerEndpoint(HonestProver(sk), pk, t0, rng), VerifierEndpoint(pk, t0, rng), b"m", sig)
    assert v.kind is Verdict.CONFIRMED
    assert time.perf_counter() - start < 1.0
