"""Timing and size measurements next to reference figures."""

from __future__ import annotations

import platform
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .codec import encoded_sizes
from .gaussian import RandomStream, make_rng
from .params import REFERENCE_COMM_KB, REFERENCE_TIMING_MS, ParamSet, theoretical_sizes
from .scheme import ml_keygen, ml_sign, verify_static

MIN_ITERS = 10
NOMINAL_HZ = 3.0e9

# Excluded from comparisons: the set-II A entry (and the PK total built from it)
# break the doubling pattern of the other sets and are not compared.
EXCLUDED_ENTRIES = {("II", "A"), ("II", "PK")}


def cpu_hz() -> tuple[float, str]:
    """Nominal clock for cycle estimates; falls back to a fixed 3 GHz."""
    try:
        with open("/proc/cpuinfo") as fh:
            for line in fh:
                if line.lower().startswith("cpu mhz"):
                    return float(line.split(":")[1]) * 1e6, "/proc/cpuinfo"
    except OSError:
        pass
    return NOMINAL_HZ, "nominal"


@dataclass
class OpTiming:
    median_ms: float
    min_ms: float
    max_ms: float
    iqr_ms: float
    cycles_est: int

    @classmethod
    def from_samples(cls, seconds: list[float], hz: float) -> "OpTiming":
        ms = np.array(seconds) * 1e3
        q1, med, q3 = np.percentile(ms, [25, 50, 75])
        return cls(float(med), float(ms.min()), float(ms.max()), float(q3 - q1), int(med / 1e3 * hz))


@dataclass
class BenchReport:
    set: str
    iterations: int
    timings: dict
    cpu_hz: float
    cycles_source: str
    sizes: dict
    reference_ms: dict | None
    machine: str = field(default_factory=platform.platform)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["timings"] = {k: asdict(v) for k, v in self.timings.items()}
        return d


def size_comparison(p: ParamSet) -> dict:
    """Encoded artefact sizes in KiB next to the closed forms and the reference sizes."""
    enc = encoded_sizes(p)
    theo = theoretical_sizes(p).kib()
    reference = REFERENCE_COMM_KB.get(p.name, {})
    out = {}
    for name in ("A", "H", "PK", "T", "v", "SK", "sigma"):
        kib = enc[name] / 1024
        entry = {"encoded_kib": round(kib, 2), "formula_kib": round(theo[name], 2)}
        if name in reference:
            entry["reference_kib"] = reference[name]
            entry["rel_dev"] = round(kib / reference[name] - 1, 4)
            entry["excluded"] = (p.name, name) in EXCLUDED_ENTRIES
        out[name] = entry
    return out


def bench_run(p: ParamSet, iters: int = MIN_ITERS, rng: RandomStream | None = None,
              msg: bytes = b"benchmark message") -> BenchReport:
    iters = max(MIN_ITERS, iters)
    rng = rng or make_rng()
    hz, src = cpu_hz()
    t_kg, t_sign, t_ver = [], [], []
    pk = sk = None
    for _ in range(iters):
        t0 = time.perf_counter()
        pk, sk = ml_keygen(p, rng)
        t_kg.append(time.perf_counter() - t0)
    for _ in range(iters):
        t0 = time.perf_counter()
        sig = ml_sign(msg, sk, pk, p, rng)
        t_sign.append(time.perf_counter() - t0)
        t0 = time.perf_counter()
        ok = verify_static(msg, sig, pk, p)
        t_ver.append(time.perf_counter() - t0)
        if not ok:
            raise RuntimeError(f"self-check failed: {ok.value}")
    timings = {"keygen": OpTiming.from_samples(t_kg, hz),
               "sign": OpTiming.from_samples(t_sign, hz),
               "verify_static": OpTiming.from_samples(t_ver, hz)}
    reference = REFERENCE_TIMING_MS.get(p.name)
    reference_ms = dict(zip(("keygen", "sign", "verify_static"), reference)) if reference else None
    return BenchReport(p.name, iters, timings, hz, src, size_comparison(p), reference_ms)
