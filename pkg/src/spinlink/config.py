"""Run configuration: a JSON document layered over built-in defaults.

Every section is optional.  Unknown sections or keys are rejected, and the
merged values go back through each module's own validation.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

from .lindblad import BASELINE_TRIPARTITE, DEFAULT_DT, DEFAULT_T_END, TripartiteParams
from .rates import GATE_CASES, EfficiencySet, TimingParamSet
from .spin_levels import Nv0Params
from .thermal import HeatScenario


class ConfigError(ValueError):
    """Configuration document is malformed or fails validation."""


@dataclass(frozen=True)
class SweepGrid:
    g_min_hz: float = 1e5
    g_max_hz: float = 1e7
    g_points: int = 25
    q_min: float = 1e2
    q_max: float = 1e6
    q_points: int = 25


@dataclass(frozen=True)
class TransferSettings:
    t_end_s: float = DEFAULT_T_END
    dt_s: float = DEFAULT_DT
    frame: str = "rotating"


@dataclass(frozen=True)
class MonteCarloSettings:
    n_trials: int = 100_000
    parallel_memories: int = 1
    reinit_on_failed_sce: bool = False
    reinit_each_cycle: bool = False


@dataclass(frozen=True)
class ChainSettings:
    """Optical efficiency chain, by cooperativity or by raw rates."""

    cooperativity: Optional[float] = 100.0
    g_opt_hz: Optional[float] = None
    kappa_hz: float = 1e9
    gamma_rad_hz: float = 1e8
    gamma_nonrad_hz: float = 0.0
    gamma_dp_hz: float = 0.0
    eta_coupling: float = 0.9
    fiber_db_per_km: float = 10.0
    fiber_length_m: float = 5.0
    eta_det: float = 0.99


@dataclass(frozen=True)
class CompareSettings:
    eta_points: int = 101
    r_scsc_hz: float = 1e6


@dataclass(frozen=True)
class RunConfig:
    tripartite: TripartiteParams = BASELINE_TRIPARTITE
    cases: dict = field(default_factory=lambda: dict(GATE_CASES))
    efficiencies: EfficiencySet = EfficiencySet()
    heat: HeatScenario = HeatScenario()
    sweep: SweepGrid = SweepGrid()
    transfer: TransferSettings = TransferSettings()
    protocol_mc: MonteCarloSettings = MonteCarloSettings()
    nv0: Nv0Params = Nv0Params(lambda_so=5e9)
    chain: ChainSettings = ChainSettings()
    compare: CompareSettings = CompareSettings()
    output_dir: Optional[str] = None
    seed: int = 0


_SECTIONS = {
    "tripartite": TripartiteParams,
    "efficiencies": EfficiencySet,
    "heat": HeatScenario,
    "sweep": SweepGrid,
    "transfer": TransferSettings,
    "protocol_mc": MonteCarloSettings,
    "nv0": Nv0Params,
    "chain": ChainSettings,
    "compare": CompareSettings,
}


def _merge(cls, base, overrides: Any, where: str):
    if not isinstance(overrides, dict):
        raise ConfigError(f"{where}: expected an object")
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(overrides) - names)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")
    values = asdict(base) if base is not None else {}
    values.update(overrides)
    try:
        return cls(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def from_dict(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be an object")
    allowed = set(_SECTIONS) | {"cases", "output_dir", "seed"}
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ConfigError(f"unknown config sections {unknown}")
    defaults = RunConfig()
    kwargs: dict[str, Any] = {}
    for name, cls in _SECTIONS.items():
        if name in doc:
            kwargs[name] = _merge(cls, getattr(defaults, name), doc[name], name)
    if "cases" in doc:
        if not isinstance(doc["cases"], dict):
            raise ConfigError("cases: expected an object keyed by case label")
        cases = dict(defaults.cases)
        for label, spec in doc["cases"].items():
            base = cases.get(label)
            if base is None:
                spec = {"label": label, **spec}
            cases[label] = _merge(TimingParamSet, base, spec, f"cases.{label}")
        kwargs["cases"] = cases
    if "output_dir" in doc:
        if not isinstance(doc["output_dir"], str):
            raise ConfigError("output_dir must be a string")
        kwargs["output_dir"] = doc["output_dir"]
    if "seed" in doc:
        seed = doc["seed"]
        if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        kwargs["seed"] = seed
    return RunConfig(**kwargs)


def load_config(path: Optional[str | Path]) -> RunConfig:
    if path is None:
        return RunConfig()
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return from_dict(doc)
