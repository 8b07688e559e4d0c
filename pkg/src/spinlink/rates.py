"""Closed-form entanglement-rate model for the memory-based link.

All rates are cyclic (Hz), all times in seconds.  Efficiencies are plain
probabilities in [0, 1].
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

import numpy as np

__all__ = [
    "TimingParamSet",
    "DerivedTiming",
    "EfficiencySet",
    "RateError",
    "GATE_CASES",
    "ENTANGLED_PHOTON_REFERENCE",
    "derive_gate_times",
    "rate_ee",
    "rate_sc_e",
    "tau_sc_e",
    "expected_max_geometric",
    "rate_sc_sc_mem",
    "rate_dc",
    "crossover_table",
    "parallel_memory_rate",
    "table_rows",
]


class RateError(ValueError):
    """Raised for invalid inputs or divergent rate expressions."""


def _check_prob(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise RateError(f"{name} must be in [0, 1], got {value!r}")


@dataclass(frozen=True)
class TimingParamSet:
    label: str
    hyperfine_a: float
    rabi_e: float
    rabi_n: Optional[float] = None
    tau_e_init: float = 5e-6
    tau_ee_attempt: float = 10e-6
    tau_e_ss: float = 10e-6
    tau_mw_emit: float = 1e-6
    tau_mw_abs: float = 1e-6
    tau_cen_override: Optional[float] = None
    # C_nNOT_e as a geometric 2pi pulse instead of a pi pulse
    geometric_cne: bool = False
    # electron single-shot readouts inside one BSM
    n_bsm_readouts: int = 2

    def __post_init__(self) -> None:
        times = {
            "tau_e_init": self.tau_e_init,
            "tau_ee_attempt": self.tau_ee_attempt,
            "tau_e_ss": self.tau_e_ss,
            "tau_mw_emit": self.tau_mw_emit,
            "tau_mw_abs": self.tau_mw_abs,
        }
        if self.tau_cen_override is not None:
            times["tau_cen_override"] = self.tau_cen_override
        for name, value in times.items():
            if not value > 0:
                raise RateError(f"{name} must be > 0, got {value!r}")
        if not self.rabi_e > 0:
            raise RateError(f"rabi_e must be > 0, got {self.rabi_e!r}")
        if self.rabi_n is not None and not self.rabi_n > 0:
            raise RateError(f"rabi_n must be > 0, got {self.rabi_n!r}")
        if self.hyperfine_a < 0:
            raise RateError("hyperfine_a must be >= 0")
        if self.n_bsm_readouts < 0:
            raise RateError("n_bsm_readouts must be >= 0")

    @property
    def r_ee(self) -> float:
        """Remote electron-electron attempt rate, one attempt per tau_ee_attempt."""
        return 1.0 / self.tau_ee_attempt

    @property
    def r_sce(self) -> float:
        """Superconductor-spin attempt rate: one emission plus one absorption."""
        return 1.0 / (self.tau_mw_emit + self.tau_mw_abs)


@dataclass(frozen=True)
class DerivedTiming:
    tau_pi2_e: float
    tau_cen: float
    tau_cne: float
    tau_n_init: float
    tau_n_swap: float
    tau_init_total: float
    tau_bsm: float


@dataclass(frozen=True)
class EfficiencySet:
    eta_e_opt: float = 1.0
    eta_sc_mw: float = 1.0
    eta_e_mw: float = 1.0
    eta_dc: float = 1.0
    eta_loss_dc: float = 1.0

    def __post_init__(self) -> None:
        for name in ("eta_e_opt", "eta_sc_mw", "eta_e_mw", "eta_dc", "eta_loss_dc"):
            _check_prob(name, getattr(self, name))

    @property
    def p_sce(self) -> float:
        """Per-attempt success probability of one superconductor-spin round."""
        return self.eta_sc_mw * self.eta_e_mw

    def with_(self, **changes) -> "EfficiencySet":
        return replace(self, **changes)


GATE_CASES: dict[str, TimingParamSet] = {
    "A": TimingParamSet(
        label="A",
        hyperfine_a=1e6,
        rabi_e=0.5e6,
        rabi_n=None,
        tau_cen_override=10e-6,
        geometric_cne=True,
    ),
    "B": TimingParamSet(label="B", hyperfine_a=100e6, rabi_e=10e6, rabi_n=0.4e6),
    "C": TimingParamSet(label="C", hyperfine_a=100e6, rabi_e=100e6, rabi_n=4e6),
}

# Published entangled-photon scheme numbers: (heat W, rate_low Hz, rate_high Hz).
# Comparison constants only, the scheme itself is not modeled.
ENTANGLED_PHOTON_REFERENCE: tuple[tuple[float, float, float], ...] = (
    (10e-6, 1e3, 10e3),
    (100e-6, 10e3, 100e3),
)


def derive_gate_times(p: TimingParamSet) -> DerivedTiming:
    """Gate times from Rabi frequencies, pi-pulse CNOTs unless overridden."""
    tau_pi2 = 1.0 / (4.0 * p.rabi_e)
    if p.tau_cen_override is not None:
        tau_cen = p.tau_cen_override
    elif p.rabi_n is not None:
        tau_cen = 1.0 / (2.0 * p.rabi_n)
    else:
        raise RateError(
            f"case {p.label!r}: rabi_n is required when tau_cen_override is not set"
        )
    tau_cne = 1.0 / p.rabi_e if p.geometric_cne else 1.0 / (2.0 * p.rabi_e)
    tau_n_swap = tau_cen + tau_cne
    tau_n_init = tau_n_swap + p.tau_e_init
    return DerivedTiming(
        tau_pi2_e=tau_pi2,
        tau_cen=tau_cen,
        tau_cne=tau_cne,
        tau_n_init=tau_n_init,
        tau_n_swap=tau_n_swap,
        tau_init_total=p.tau_e_init + tau_n_init,
        tau_bsm=tau_cen + tau_pi2 + tau_cne + p.n_bsm_readouts * p.tau_e_ss,
    )


def rate_ee(r_ee: float, eta_e_opt: float) -> float:
    """Heralded remote spin-spin rate; only two of four Bell states are heralded."""
    _check_prob("eta_e_opt", eta_e_opt)
    return 0.5 * r_ee * eta_e_opt**2


def rate_sc_e(r_sce: float, eta_sc_mw: float, eta_e_mw: float) -> float:
    _check_prob("eta_sc_mw", eta_sc_mw)
    _check_prob("eta_e_mw", eta_e_mw)
    return r_sce * eta_sc_mw * eta_e_mw


def expected_max_geometric(p: float) -> float:
    """E[max(X, Y)] for independent X, Y ~ Geometric(p) on {1, 2, ...}."""
    if not 0.0 < p <= 1.0:
        raise RateError(f"success probability must be in (0, 1], got {p!r}")
    return (3.0 - 2.0 * p) / (p * (2.0 - p))


def _max_geometric_series(p: float, rel_tol: float = 1e-12, chunk: int = 4096) -> float:
    # Term i is the k = i + 2 round of the max-of-two distribution, weighted by k.
    q = 1.0 - p
    total = p * p
    start = 0
    carry = 0.0
    while True:
        i = np.arange(start, start + chunk, dtype=float)
        q_pow = q ** (i + 1.0)
        # running sum of q**j for j = 0..i, carried across chunks
        geo = np.cumsum(q**i) + carry
        carry = float(geo[-1])
        terms = (i + 2.0) * p * p * q_pow * (q_pow + 2.0 * geo)
        total += float(np.sum(terms))
        start += chunk
        if q == 0.0:
            return total
        # every bracket is <= 3/p, so the remaining tail is bounded by
        # 3p * sum_{k>=m} k q^(k-1) with m = start + 2
        m = start + 2
        tail = 3.0 * q ** (m - 1) * (m - (m - 1) * q) / p
        if tail < rel_tol * total:
            return total


def tau_sc_e(p_succ: float, r_sce: float, mode: str = "series") -> float:
    """Mean time until both nodes hold a superconductor-spin pair.

    The two nodes attempt in synchronized rounds of length ``1/r_sce``; the
    cycle ends when the slower node succeeds.  ``mode="series"`` sums the
    round-by-round expectation term by term, ``mode="closed_form"`` uses
    (3 - 2p) / (p (2 - p)).
    """
    if p_succ == 0:
        raise RateError("superconductor-spin success probability is zero; tau_sc_e diverges")
    if not 0.0 < p_succ <= 1.0:
        raise RateError(f"p_succ must be in (0, 1], got {p_succ!r}")
    if not r_sce > 0:
        raise RateError(f"r_sce must be > 0, got {r_sce!r}")
    if mode == "series":
        rounds = _max_geometric_series(p_succ)
    elif mode == "closed_form":
        rounds = expected_max_geometric(p_succ)
    else:
        raise RateError(f"unknown mode {mode!r}")
    return rounds / r_sce


def rate_sc_sc_mem(
    t: DerivedTiming,
    p: TimingParamSet,
    e: EfficiencySet,
    r_ee: Optional[float] = None,
    r_sce: Optional[float] = None,
    mode: str = "series",
) -> float:
    """Rate of delivered superconductor-superconductor pairs through the memories."""
    r_ee = p.r_ee if r_ee is None else r_ee
    r_sce = p.r_sce if r_sce is None else r_sce
    big_r_ee = rate_ee(r_ee, e.eta_e_opt)
    if big_r_ee == 0:
        raise RateError("remote spin-spin rate is zero; memory rate diverges")
    cycle = (
        t.tau_init_total
        + 1.0 / big_r_ee
        + t.tau_n_swap
        + tau_sc_e(e.p_sce, r_sce, mode=mode)
        + t.tau_bsm
    )
    return 1.0 / cycle


def rate_dc(r_scsc: float, eta_dc: float, eta_loss_dc: float) -> float:
    """Direct microwave-to-optical conversion scheme rate."""
    _check_prob("eta_dc", eta_dc)
    _check_prob("eta_loss_dc", eta_loss_dc)
    return 0.5 * r_scsc * eta_dc**2 * eta_loss_dc**2


def parallel_memory_rate(t: DerivedTiming, e: EfficiencySet, r_sce: float) -> float:
    """Steady-state rate when spin-spin preparation hides behind another memory's BSM."""
    denom = tau_sc_e(e.p_sce, r_sce) + t.tau_bsm
    if math.isinf(denom):
        return 0.0
    return 1.0 / denom


@dataclass(frozen=True)
class CrossoverRow:
    case: str
    eta_e_mw: float
    eta_dc: float
    rate_mem_hz: float
    rate_dc_hz: float
    winner: str  # "memory", "dc", "tie" or "degenerate"


def crossover_table(
    cases: Iterable[TimingParamSet],
    eta_grid: Iterable[float],
    dc_grid: Iterable[float],
    base: EfficiencySet = EfficiencySet(),
    r_scsc: float = 1e6,
) -> list[CrossoverRow]:
    """Memory rate at each eta_e_mw against the DC rate at each eta_dc."""
    cases = list(cases)
    eta_grid = list(eta_grid)
    dc_grid = list(dc_grid)
    if not cases or not eta_grid or not dc_grid:
        raise RateError("crossover_table needs non-empty cases and grids")
    rows: list[CrossoverRow] = []
    for case in cases:
        timing = derive_gate_times(case)
        for eta in eta_grid:
            eff = base.with_(eta_e_mw=eta)
            if eff.p_sce == 0 or eff.eta_e_opt == 0:
                mem = 0.0
            else:
                mem = rate_sc_sc_mem(timing, case, eff)
            for eta_dc in dc_grid:
                dc = rate_dc(r_scsc, eta_dc, base.eta_loss_dc)
                if mem == 0.0 and dc == 0.0:
                    winner = "degenerate"
                elif mem > dc:
                    winner = "memory"
                elif dc > mem:
                    winner = "dc"
                else:
                    winner = "tie"
                rows.append(CrossoverRow(case.label, eta, eta_dc, mem, dc, winner))
    return rows


def table_rows(
    cases: Iterable[TimingParamSet], eff: EfficiencySet = EfficiencySet()
) -> list[dict[str, float | str]]:
    """Per-case records: inputs, derived gate times and the memory rate."""
    out = []
    for case in cases:
        t = derive_gate_times(case)
        out.append(
            {
                "case": case.label,
                "hyperfine_a_hz": case.hyperfine_a,
                "rabi_e_hz": case.rabi_e,
                "rabi_n_hz": "" if case.rabi_n is None else case.rabi_n,
                "tau_e_init_s": case.tau_e_init,
                "tau_n_init_s": t.tau_n_init,
                "tau_ee_s": case.tau_ee_attempt,
                "tau_n_swap_s": t.tau_n_swap,
                "tau_mw_emit_s": case.tau_mw_emit,
                "tau_mw_abs_s": case.tau_mw_abs,
                "tau_pi2_e_s": t.tau_pi2_e,
                "tau_cen_s": t.tau_cen,
                "tau_cne_s": t.tau_cne,
                "tau_e_ss_s": case.tau_e_ss,
                "tau_bsm_s": t.tau_bsm,
                "rate_sc_sc_mem_hz": rate_sc_sc_mem(t, case, eff),
            }
        )
    return out
