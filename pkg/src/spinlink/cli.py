"""``spinlink`` command line.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O failure.  Failures print ``error category=<name>: <message>`` on stderr.
"""
from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import io as out
from .config import ConfigError, RunConfig, load_config
from .lindblad import (
    DensityMatrix,
    IntegrationError,
    evolve,
    max_spin_population,
    sweep_transfer,
)
from .protocol_mc import ConfigError as McConfigError
from .protocol_mc import ProtocolConfig, simulate_parallel, simulate_protocol
from .rates import (
    ENTANGLED_PHOTON_REFERENCE,
    RateError,
    crossover_table,
    derive_gate_times,
    rate_dc,
    rate_sc_sc_mem,
    table_rows,
)
from .spin_levels import (
    EfficiencyChain,
    chain_for_cooperativity,
    efficiency_breakdown,
    fiber_transmission,
    nv0_levels,
    orbital_mixing,
)
from .statevector import bell_fidelity, run_single_photon_protocol, two_photon_outcomes
from .thermal import heat_budget

OUT_ENV = "SPINLINK_OUT"

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

RATES_COLUMNS = (
    "case",
    "hyperfine_a_hz",
    "rabi_e_hz",
    "rabi_n_hz",
    "tau_e_init_s",
    "tau_n_init_s",
    "tau_ee_s",
    "tau_n_swap_s",
    "tau_mw_emit_s",
    "tau_mw_abs_s",
    "tau_pi2_e_s",
    "tau_cen_s",
    "tau_cne_s",
    "tau_e_ss_s",
    "tau_bsm_s",
    "rate_sc_sc_mem_hz",
)


def _pick_case(cfg: RunConfig, label: str):
    try:
        return cfg.cases[label]
    except KeyError:
        raise ConfigError(f"unknown case {label!r}; known: {sorted(cfg.cases)}") from None


def _efficiencies(cfg: RunConfig, args):
    changes = {}
    for name in ("eta_e_opt", "eta_sc_mw", "eta_e_mw", "eta_dc", "eta_loss_dc"):
        value = getattr(args, name, None)
        if value is not None:
            changes[name] = value
    try:
        return dataclasses.replace(cfg.efficiencies, **changes)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_transfer(cfg: RunConfig, args, outdir: Path) -> str:
    params = cfg.tripartite
    changes = {}
    if args.g_m_e is not None:
        changes["g_m_e"] = args.g_m_e
    if args.q_mw is not None:
        changes["gamma_mw"] = params.omega_mw / args.q_mw
    if args.fock_cutoff is not None:
        changes["fock_cutoff"] = args.fock_cutoff
    try:
        params = dataclasses.replace(params, **changes)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    t_end = args.t_end if args.t_end is not None else cfg.transfer.t_end_s
    dt = args.dt if args.dt is not None else cfg.transfer.dt_s
    frame = args.frame or cfg.transfer.frame
    traj = evolve(DensityMatrix.basis(params), params, t_end=t_end, dt=dt, frame=frame)
    eta, t_peak = max_spin_population(traj)
    out.emit_csv(outdir / "trajectory.csv", traj.rows(), out.TRAJECTORY_COLUMNS)
    out.emit_json(
        outdir / "trajectory_meta.json",
        {
            "params": dataclasses.asdict(params),
            "eta_e_mw": eta,
            "t_peak_s": t_peak,
            **traj.metadata,
        },
    )
    return f"eta_e_mw={out.format_value(eta)} t_peak_s={out.format_value(t_peak)}"


def cmd_sweep(cfg: RunConfig, args, outdir: Path) -> str:
    grid = cfg.sweep
    n_g = args.points or grid.g_points
    n_q = args.points or grid.q_points
    g_values = np.logspace(np.log10(grid.g_min_hz), np.log10(grid.g_max_hz), n_g)
    q_values = np.logspace(np.log10(grid.q_min), np.log10(grid.q_max), n_q)
    points = sweep_transfer(
        g_values,
        q_values,
        base=cfg.tripartite,
        t_end=cfg.transfer.t_end_s,
        dt=cfg.transfer.dt_s,
        workers=args.threads,
    )
    out.emit_csv(
        outdir / "sweep_transfer.csv",
        ((p.g_hz, p.q_mw, p.eta_e_mw) for p in points),
        out.SWEEP_COLUMNS,
    )
    best = max(points, key=lambda p: p.eta_e_mw)
    return (
        f"points={len(points)} best_eta={out.format_value(best.eta_e_mw)} "
        f"at g_hz={out.format_value(best.g_hz)} q_mw={out.format_value(best.q_mw)}"
    )


def cmd_rates(cfg: RunConfig, args, outdir: Path) -> str:
    labels = sorted(cfg.cases) if args.all_cases else [args.case]
    cases = [_pick_case(cfg, label) for label in labels]
    eff = _efficiencies(cfg, args)
    rows = table_rows(cases, eff)
    out.emit_csv(outdir / "rates.csv", rows, RATES_COLUMNS)
    return " ".join(
        f"{r['case']}={r['rate_sc_sc_mem_hz'] / 1e3:.1f}kHz" for r in rows
    )


def cmd_compare(cfg: RunConfig, args, outdir: Path) -> str:
    eff = _efficiencies(cfg, args)
    etas = np.linspace(0.0, 1.0, cfg.compare.eta_points)
    labels = sorted(cfg.cases) if args.case is None else [args.case]
    cases = [_pick_case(cfg, label) for label in labels]
    records = []
    for case in cases:
        timing = derive_gate_times(case)
        for eta in etas:
            e = dataclasses.replace(eff, eta_e_mw=float(eta))
            rate = 0.0 if e.p_sce == 0 else rate_sc_sc_mem(timing, case, e)
            records.append((float(eta), "memory", case.label, rate))
    for eta in etas:
        records.append((float(eta), "dc", "", rate_dc(cfg.compare.r_scsc_hz, float(eta), eff.eta_loss_dc)))
    for heat, low, high in ENTANGLED_PHOTON_REFERENCE:
        tag = f"{heat * 1e6:g}uW"
        records.append((None, "entangled_photon", f"{tag}_low", low))
        records.append((None, "entangled_photon", f"{tag}_high", high))
    out.emit_csv(outdir / "compare.csv", records, out.COMPARE_COLUMNS)

    rows = crossover_table(cases, [args.eta_e_mw_point], [args.eta_dc_point], base=eff, r_scsc=cfg.compare.r_scsc_hz)
    out.emit_csv(
        outdir / "crossover.csv",
        (dataclasses.astuple(r) for r in rows),
        ("case", "eta_e_mw", "eta_dc", "rate_mem_hz", "rate_dc_hz", "winner"),
    )
    return " ".join(f"{r.case}:{r.winner}" for r in rows)


def cmd_protocol_mc(cfg: RunConfig, args, outdir: Path) -> str:
    case = _pick_case(cfg, args.case)
    eff = _efficiencies(cfg, args)
    mc = cfg.protocol_mc
    parallel = args.parallel if args.parallel is not None else mc.parallel_memories
    try:
        pcfg = ProtocolConfig(
            timing=case,
            efficiencies=eff,
            n_trials=args.trials if args.trials is not None else mc.n_trials,
            rng_seed=cfg.seed if args.seed is None else args.seed,
            parallel_memories=parallel,
            reinit_on_failed_sce=mc.reinit_on_failed_sce,
            reinit_each_cycle=mc.reinit_each_cycle,
        )
        if parallel > 1:
            result = simulate_parallel(pcfg)
        else:
            result = simulate_protocol(pcfg, threads=args.threads)
    except McConfigError as exc:
        raise ConfigError(str(exc)) from exc
    out.emit_json(outdir / "protocol_mc.json", result.summary())
    out.emit_csv(
        outdir / "protocol_mc_hist.csv",
        (
            (name, k, int(c))
            for name, hist in result.attempt_histograms.items()
            for k, c in enumerate(hist)
            if c
        ),
        ("histogram", "attempts", "count"),
    )
    return (
        f"rate_hz={out.format_value(result.rate_hz)} "
        f"+/- {out.format_value(result.rate_err_hz)}"
    )


def cmd_herald(cfg: RunConfig, args, outdir: Path) -> str:
    thetas = np.linspace(0.0, 2 * math.pi, args.n_theta)
    records = []
    for theta in thetas:
        single = run_single_photon_protocol(float(theta))
        records.append((float(theta), "single_photon", bell_fidelity(single.post_state), single.probability))
        two = two_photon_outcomes(float(theta))
        first, target = two[0]
        p_total = sum(o.probability for o, _ in two)
        records.append((float(theta), "two_photon", bell_fidelity(first.post_state, target), p_total))
    out.emit_csv(outdir / "herald.csv", records, out.HERALD_COLUMNS)
    return f"rows={len(records)}"


def cmd_heat(cfg: RunConfig, args, outdir: Path) -> str:
    changes = {}
    for f in dataclasses.fields(cfg.heat):
        value = getattr(args, f"heat_{f.name}", None)
        if value is not None:
            changes[f.name] = value
    if args.derive_drive_power:
        changes["drive_power_w"] = None
    try:
        scenario = dataclasses.replace(cfg.heat, **changes)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    report = heat_budget(scenario)
    out.emit_json(outdir / "heat.json", report)
    return (
        f"dissipated_w={out.format_value(report['dissipated_microwave_w'])} "
        f"total_w={out.format_value(report['total_heat_w'])} "
        f"margin={out.format_value(report['cooling_margin'])}"
    )


def cmd_levels(cfg: RunConfig, args, outdir: Path) -> str:
    changes = {
        k: v
        for k, v in (
            ("lambda_so", args.lambda_so),
            ("eps_perp", args.eps_perp),
            ("d_perp", args.d_perp),
            ("b_z", args.b_z),
        )
        if v is not None
    }
    p = dataclasses.replace(cfg.nv0, **changes)
    levels = nv0_levels(p)
    out.emit_csv(
        outdir / "levels.csv",
        ((lv.energy_hz, lv.orbit_character, lv.spin_character) for lv in levels),
        out.LEVELS_COLUMNS,
    )
    angle, regime = orbital_mixing(p)
    out.emit_json(
        outdir / "levels_meta.json",
        {"params": dataclasses.asdict(p), "basis": "orbit(+,-) x spin(up,down)", "mixing_angle_rad": angle, "regime": regime},
    )
    return f"regime={regime} mixing_angle_rad={out.format_value(angle)}"


def _chain(cfg: RunConfig, args) -> EfficiencyChain:
    c = cfg.chain
    eta_loss = fiber_transmission(c.fiber_db_per_km, c.fiber_length_m)
    coop = args.cooperativity if args.cooperativity is not None else c.cooperativity
    etas = dict(eta_coupling=c.eta_coupling, eta_loss=eta_loss, eta_det=c.eta_det)
    try:
        if c.g_opt_hz is not None and args.cooperativity is None:
            return EfficiencyChain(
                g_opt=c.g_opt_hz,
                kappa=c.kappa_hz,
                gamma_rad=c.gamma_rad_hz,
                gamma_nonrad=c.gamma_nonrad_hz,
                gamma_dp=c.gamma_dp_hz,
                **etas,
            )
        return chain_for_cooperativity(coop, kappa=c.kappa_hz, gamma=c.gamma_rad_hz, **etas)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def cmd_efficiency(cfg: RunConfig, args, outdir: Path) -> str:
    breakdown = efficiency_breakdown(_chain(cfg, args))
    columns = tuple(breakdown)
    out.emit_csv(outdir / "efficiency.csv", [breakdown], columns)
    return f"eta_e_opt={out.format_value(breakdown['eta_e_opt'])}"


COMMANDS = {
    "transfer": cmd_transfer,
    "sweep-transfer": cmd_sweep,
    "rates": cmd_rates,
    "compare": cmd_compare,
    "protocol-mc": cmd_protocol_mc,
    "herald": cmd_herald,
    "heat": cmd_heat,
    "levels": cmd_levels,
    "efficiency": cmd_efficiency,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error category=config: {message}\n")
        raise SystemExit(EXIT_CONFIG)


def _add_eta_flags(p: argparse.ArgumentParser) -> None:
    for name in ("eta-e-opt", "eta-sc-mw", "eta-e-mw", "eta-dc", "eta-loss-dc"):
        p.add_argument(f"--{name}", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", default=None, help="JSON run configuration")
    common.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or .)")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)

    parser = _Parser(prog="spinlink", description="Memory-assisted superconducting-qubit link toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("transfer", parents=[common], help="photon-to-spin transfer trajectory")
    p.add_argument("--t-end", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--frame", choices=("rotating", "lab"))
    p.add_argument("--g-m-e", type=float)
    p.add_argument("--q-mw", type=float)
    p.add_argument("--fock-cutoff", type=int)

    p = sub.add_parser("sweep-transfer", parents=[common], help="peak spin population over (g, Q)")
    p.add_argument("--points", type=int, help="grid points per axis")

    p = sub.add_parser("rates", parents=[common], help="memory-assisted rates for the gate-time cases")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--case", default="B")
    group.add_argument("--all-cases", action="store_true")
    _add_eta_flags(p)

    p = sub.add_parser("compare", parents=[common], help="memory vs direct conversion")
    p.add_argument("--case", default=None)
    p.add_argument("--eta-e-mw-point", type=float, default=0.1)
    p.add_argument("--eta-dc-point", type=float, default=0.1)
    _add_eta_flags(p)

    p = sub.add_parser("protocol-mc", parents=[common], help="Monte-Carlo protocol simulation")
    p.add_argument("--case", default="B")
    p.add_argument("--trials", type=int)
    p.add_argument("--parallel", type=int)
    _add_eta_flags(p)

    p = sub.add_parser("herald", parents=[common], help="single/two-photon heralding fidelities")
    p.add_argument("--n-theta", type=int, default=73)

    p = sub.add_parser("heat", parents=[common], help="in-refrigerator heat budget")
    for f in dataclasses.fields(RunConfig().heat):
        p.add_argument(f"--{f.name.replace('_', '-')}", dest=f"heat_{f.name}", type=float, default=None)
    p.add_argument("--derive-drive-power", action="store_true", help="drive power from the field/current chain")

    p = sub.add_parser("levels", parents=[common], help="NV0 ground-state levels")
    p.add_argument("--lambda-so", type=float)
    p.add_argument("--eps-perp", type=float)
    p.add_argument("--d-perp", type=float)
    p.add_argument("--b-z", type=float)

    p = sub.add_parser("efficiency", parents=[common], help="optical efficiency chain")
    p.add_argument("--cooperativity", type=float)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        outdir = Path(args.out or cfg.output_dir or os.environ.get(OUT_ENV) or ".")
        summary = COMMANDS[args.command](cfg, args, outdir)
    except (ConfigError, McConfigError) as exc:
        return _fail("config", EXIT_CONFIG, exc)
    except (IntegrationError, RateError, FloatingPointError, ArithmeticError) as exc:
        return _fail("numerical", EXIT_NUMERICAL, exc)
    except OSError as exc:
        return _fail("io", EXIT_IO, exc)
    print(f"{args.command}: {summary}")
    return 0


def _fail(category: str, code: int, exc: Exception) -> int:
    sys.stderr.write(f"error category={category}: {exc}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
