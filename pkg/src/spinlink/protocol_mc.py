"""Monte-Carlo simulation of the memory-assisted superconductor link.

Each delivered superconductor-superconductor pair goes through: spin
initialization, heralded remote electron-electron attempts, a swap onto the
nuclear spin, synchronized superconductor-spin rounds at both nodes until
both have succeeded, and the electron-nuclear Bell-state measurement.

Randomness comes from numpy's PCG64 generator.  Trials are cut into fixed
chunks of ``CHUNK`` trials; chunk ``k`` draws from the ``k``-th child of
``SeedSequence(seed)``.  The chunking does not depend on the thread count
and every per-chunk statistic is an integer count, so results are
bit-identical however the chunks are scheduled.
"""
from __future__ import annotations

import heapq
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .rates import DerivedTiming, EfficiencySet, TimingParamSet, derive_gate_times

CHUNK = 1 << 16
RNG_ALGORITHM = f"numpy.random.PCG64; SeedSequence(seed).spawn(k) per {CHUNK}-trial chunk"

PHASES = ("init", "e-e", "swap", "sc-e", "bsm")


class ConfigError(ValueError):
    """Invalid Monte-Carlo configuration."""


@dataclass(frozen=True)
class ProtocolConfig:
    timing: TimingParamSet
    efficiencies: EfficiencySet = EfficiencySet()
    r_ee_attempt: Optional[float] = None
    r_sce_attempt: Optional[float] = None
    n_trials: int = 100_000
    rng_seed: int = 0
    parallel_memories: int = 1
    # sensitivity knob: charge nuclear re-initialization after every failed sc-e round
    reinit_on_failed_sce: bool = False
    # pipelined mode: charge the full spin initialization on every preparation
    reinit_each_cycle: bool = False

    def __post_init__(self) -> None:
        if self.n_trials < 1:
            raise ConfigError("n_trials must be >= 1")
        if self.parallel_memories < 1:
            raise ConfigError("parallel_memories must be >= 1")
        if not 0 <= self.rng_seed < 2**64:
            raise ConfigError("rng_seed must be a 64-bit unsigned integer")
        for name in ("r_ee_attempt", "r_sce_attempt"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ConfigError(f"{name} must be > 0")

    @property
    def derived(self) -> DerivedTiming:
        return derive_gate_times(self.timing)

    @property
    def r_ee(self) -> float:
        return self.timing.r_ee if self.r_ee_attempt is None else self.r_ee_attempt

    @property
    def r_sce(self) -> float:
        return self.timing.r_sce if self.r_sce_attempt is None else self.r_sce_attempt

    @property
    def p_ee(self) -> float:
        return 0.5 * self.efficiencies.eta_e_opt**2

    @property
    def p_sce(self) -> float:
        return self.efficiencies.p_sce

    def check(self) -> None:
        if self.p_ee <= 0:
            raise ConfigError("electron-electron success probability is zero (eta_e_opt = 0)")
        if self.p_sce <= 0:
            raise ConfigError("superconductor-spin success probability is zero")


@dataclass(frozen=True)
class McResult:
    n_trials: int
    mean_cycle_time: float
    cycle_time_sem: float
    rate_hz: float
    rate_err_hz: float
    attempt_histograms: dict[str, np.ndarray]
    breakdown: dict[str, float]
    metadata: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "n_trials": self.n_trials,
            "mean_cycle_time_s": self.mean_cycle_time,
            "cycle_time_sem_s": self.cycle_time_sem,
            "rate_hz": self.rate_hz,
            "rate_err_hz": self.rate_err_hz,
            "breakdown_s": dict(self.breakdown),
            "mean_attempts": {
                k: float(np.dot(np.arange(len(h)), h) / max(1, h.sum()))
                for k, h in self.attempt_histograms.items()
            },
            "metadata": dict(self.metadata),
        }


def _chunks(n_trials: int) -> list[tuple[int, int]]:
    return [(k, min(CHUNK, n_trials - k * CHUNK)) for k in range(math.ceil(n_trials / CHUNK))]


def _rngs(seed: int, n_chunks: int) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(n_chunks)]


def _merge_hist(hists: list[np.ndarray]) -> np.ndarray:
    size = max(len(h) for h in hists)
    out = np.zeros(size, dtype=np.int64)
    for h in hists:
        out[: len(h)] += h
    return out


def _run_chunks(fn, seed: int, n_trials: int, threads: int) -> list:
    chunks = _chunks(n_trials)
    rngs = _rngs(seed, len(chunks))
    jobs = [(rngs[k], size) for k, size in chunks]
    if threads <= 1 or len(jobs) == 1:
        return [fn(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def max_geometric_oracle(p: float, n_trials: int, seed: int = 0, threads: int = 1) -> tuple[float, float]:
    """Mean and standard error of max(X, Y), X, Y ~ Geometric(p), by sampling."""
    if not 0.0 < p <= 1.0:
        raise ConfigError("p must be in (0, 1]")
    if n_trials < 1:
        raise ConfigError("n_trials must be >= 1")

    def chunk(rng: np.random.Generator, size: int) -> tuple[int, int]:
        m = np.maximum(rng.geometric(p, size), rng.geometric(p, size)).astype(np.int64)
        return int(m.sum()), int((m * m).sum())

    parts = _run_chunks(chunk, seed, n_trials, threads)
    s1 = sum(p_[0] for p_ in parts)
    s2 = sum(p_[1] for p_ in parts)
    mean = s1 / n_trials
    var = (s2 - s1 * s1 / n_trials) / (n_trials - 1) if n_trials > 1 else 0.0
    return mean, math.sqrt(max(var, 0.0) / n_trials)


def _sample_serial_chunk(cfg: ProtocolConfig):
    p_ee, p_sce = cfg.p_ee, cfg.p_sce

    def chunk(rng: np.random.Generator, size: int) -> dict:
        n_ee = rng.geometric(p_ee, size).astype(np.int64)
        n_a = rng.geometric(p_sce, size).astype(np.int64)
        n_b = rng.geometric(p_sce, size).astype(np.int64)
        n_max = np.maximum(n_a, n_b)
        return {
            "sums": (
                int(n_ee.sum()),
                int((n_ee * n_ee).sum()),
                int(n_max.sum()),
                int((n_max * n_max).sum()),
                int((n_ee * n_max).sum()),
            ),
            "hist": {
                "e-e": np.bincount(n_ee),
                "sc-e_A": np.bincount(n_a),
                "sc-e_B": np.bincount(n_b),
                "sc-e_max": np.bincount(n_max),
            },
        }

    return chunk


def simulate_protocol(cfg: ProtocolConfig, threads: int = 1) -> McResult:
    """Serial (single-memory) protocol: one full cycle per delivered pair."""
    cfg.check()
    t = cfg.derived
    n = cfg.n_trials
    parts = _run_chunks(_sample_serial_chunk(cfg), cfg.rng_seed, n, threads)
    s_ee, s_ee2, s_sc, s_sc2, s_x = (sum(p["sums"][i] for p in parts) for i in range(5))
    hist = {k: _merge_hist([p["hist"][k] for p in parts]) for k in parts[0]["hist"]}

    a = 1.0 / cfg.r_ee
    b = 1.0 / cfg.r_sce
    # n rounds cost n*b plus (n - 1) re-initializations when enabled
    extra_per_failed = t.tau_n_init if cfg.reinit_on_failed_sce else 0.0
    sce_slope = b + extra_per_failed

    breakdown = {
        "init": t.tau_init_total,
        "e-e": a * s_ee / n,
        "swap": t.tau_n_swap,
        "sc-e": (sce_slope * s_sc - extra_per_failed * n) / n,
        "bsm": t.tau_bsm,
    }
    mean = sum(breakdown.values())
    if n > 1:
        var_ee = (s_ee2 - s_ee * s_ee / n) / (n - 1)
        var_sc = (s_sc2 - s_sc * s_sc / n) / (n - 1)
        cov = (s_x - s_ee * s_sc / n) / (n - 1)
        var = a * a * var_ee + sce_slope**2 * var_sc + 2 * a * sce_slope * cov
        sem = math.sqrt(max(var, 0.0) / n)
    else:
        sem = 0.0
    rate = 1.0 / mean
    return McResult(
        n_trials=n,
        mean_cycle_time=mean,
        cycle_time_sem=sem,
        rate_hz=rate,
        rate_err_hz=sem / mean**2,
        attempt_histograms=hist,
        breakdown=breakdown,
        metadata={
            "mode": "serial",
            "rng": RNG_ALGORITHM,
            "seed": cfg.rng_seed,
            "case": cfg.timing.label,
            "p_ee": cfg.p_ee,
            "p_sce": cfg.p_sce,
        },
    )


def simulate_parallel(cfg: ProtocolConfig, warmup: Optional[int] = None) -> McResult:
    """Pipelined memories sharing one superconducting delivery path.

    Every memory loops: prepare (remote e-e attempts and the nuclear swap)
    then deliver (sc-e rounds and the BSM).  Deliveries are served one at a
    time, first ready first served; a memory starts preparing again as soon
    as its own delivery ends.  The first preparation of each memory also
    pays the full initialization; later ones only if ``reinit_each_cycle``.
    ``n_trials`` deliveries are simulated and the first ``warmup`` are
    dropped from the steady-state statistics.
    """
    cfg.check()
    m = cfg.parallel_memories
    if m < 2:
        raise ConfigError("simulate_parallel needs parallel_memories >= 2")
    t = cfg.derived
    n = cfg.n_trials
    if warmup is None:
        warmup = min(n // 10, 1000)
    if n - warmup < 2:
        raise ConfigError("not enough deliveries after warm-up")

    # one stream for the sequential event loop, spawned from the seed
    rng = _rngs(cfg.rng_seed, 1)[0]
    total_preps = n + m
    n_ee = rng.geometric(cfg.p_ee, total_preps).astype(np.int64)
    n_a = rng.geometric(cfg.p_sce, n).astype(np.int64)
    n_b = rng.geometric(cfg.p_sce, n).astype(np.int64)
    n_max = np.maximum(n_a, n_b)

    prep_base = t.tau_n_swap + (t.tau_init_total if cfg.reinit_each_cycle else 0.0)
    prep = n_ee / cfg.r_ee + prep_base
    prep[:m] += 0.0 if cfg.reinit_each_cycle else t.tau_init_total
    sce = n_max / cfg.r_sce
    deliver = sce + t.tau_bsm

    ready = [(float(prep[i]), i) for i in range(m)]
    heapq.heapify(ready)
    next_prep = m
    server_free = 0.0
    ends = np.empty(n)
    idle = np.empty(n)
    for k in range(n):
        r, mem = heapq.heappop(ready)
        start = max(server_free, r)
        idle[k] = start - server_free
        server_free = start + deliver[k]
        ends[k] = server_free
        heapq.heappush(ready, (server_free + float(prep[next_prep]), mem))
        next_prep += 1

    # steady state: intervals between consecutive delivery ends
    intervals = np.diff(ends[warmup:])
    steady_idle = idle[warmup + 1 :]
    steady_sce = sce[warmup + 1 :]
    n_int = len(intervals)
    mean = float(intervals.mean())
    breakdown = {
        "sc-e": float(steady_sce.mean()),
        "bsm": t.tau_bsm,
        "idle": float(steady_idle.mean()),
    }
    # intervals are correlated; batch means give an honest error bar
    n_batches = min(20, n_int)
    batches = np.array([b.mean() for b in np.array_split(intervals, n_batches)])
    sem = float(batches.std(ddof=1) / math.sqrt(n_batches)) if n_batches > 1 else 0.0
    hist = {
        "e-e": np.bincount(n_ee),
        "sc-e_A": np.bincount(n_a),
        "sc-e_B": np.bincount(n_b),
        "sc-e_max": np.bincount(n_max),
    }
    return McResult(
        n_trials=n,
        mean_cycle_time=mean,
        cycle_time_sem=sem,
        rate_hz=1.0 / mean,
        rate_err_hz=sem / mean**2,
        attempt_histograms=hist,
        breakdown=breakdown,
        metadata={
            "mode": "parallel",
            "parallel_memories": m,
            "warmup": warmup,
            "rng": RNG_ALGORITHM,
            "seed": cfg.rng_seed,
            "case": cfg.timing.label,
            "reinit_each_cycle": cfg.reinit_each_cycle,
        },
    )


def geometric_pmf(p: float, k: np.ndarray) -> np.ndarray:
    k = np.asarray(k)
    return np.where(k >= 1, p * (1.0 - p) ** (k - 1.0), 0.0)


def max_geometric_pmf(p: float, k: np.ndarray) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    q = 1.0 - p
    cdf = lambda x: np.where(x >= 1, 1.0 - q**x, 0.0) ** 2  # noqa: E731
    return np.where(k >= 1, cdf(k) - cdf(k - 1.0), 0.0)
