"""Microwave photon / phonon / spin chain under a Lindblad master equation.

Parameters are cyclic frequencies in Hz; the integrator converts to angular
units (multiplies by 2*pi) internally.  The Hilbert space is ordered
``mw mode (x) mechanical mode (x) spin``, each bosonic mode truncated at
``fock_cutoff`` quanta.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-8
POSITIVITY_TOL = 1e-8
TRACE_DRIFT_LIMIT = 1e-6

DEFAULT_DT = 1e-9
DEFAULT_T_END = 2e-6
# largest |lambda| * h allowed for one internal RK4 substep
MAX_STEP_PHASE = 0.02

SPIN_DISSIPATOR = "gamma_e/2 * (2 n rho n - {n, rho}), n = sigma^dag sigma (pure dephasing)"


class IntegrationError(RuntimeError):
    """Numerical failure of the master-equation integration."""


@dataclass(frozen=True)
class TripartiteParams:
    omega_mw: float
    omega_m: float
    omega_e: float
    g_mw_m: float
    g_m_e: float
    gamma_mw: float
    gamma_m: float
    gamma_e: float
    fock_cutoff: int = 1

    def __post_init__(self) -> None:
        if int(self.fock_cutoff) != self.fock_cutoff or self.fock_cutoff < 1:
            raise ValueError(f"fock_cutoff must be an integer >= 1, got {self.fock_cutoff!r}")
        for name in ("omega_mw", "omega_m", "omega_e"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        for name in ("g_mw_m", "g_m_e", "gamma_mw", "gamma_m", "gamma_e"):
            value = getattr(self, name)
            if not value >= 0 or not math.isfinite(value):
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")

    @property
    def levels(self) -> int:
        return self.fock_cutoff + 1

    @property
    def dim(self) -> int:
        return self.levels**2 * 2

    @property
    def q_mw(self) -> float:
        return math.inf if self.gamma_mw == 0 else self.omega_mw / self.gamma_mw

    def with_(self, **changes) -> "TripartiteParams":
        return replace(self, **changes)


# 5 GHz everywhere, 1 MHz couplings, Q = 1e4 cavities, 10 kHz spin dephasing
BASELINE_TRIPARTITE = TripartiteParams(
    omega_mw=5e9,
    omega_m=5e9,
    omega_e=5e9,
    g_mw_m=1e6,
    g_m_e=1e6,
    gamma_mw=500e3,
    gamma_m=500e3,
    gamma_e=10e3,
    fock_cutoff=1,
)


def _destroy(n_levels: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_levels, dtype=float)), k=1).astype(complex)


def operators(params: TripartiteParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Lowering operators (a_mw, b_m, sigma_e) on the full tensor-product space."""
    levels = params.levels
    eye_b = np.eye(levels, dtype=complex)
    eye_s = np.eye(2, dtype=complex)
    a = np.kron(np.kron(_destroy(levels), eye_b), eye_s)
    b = np.kron(np.kron(eye_b, _destroy(levels)), eye_s)
    sigma = np.kron(np.kron(eye_b, eye_b), _destroy(2))
    return a, b, sigma


def basis_index(params: TripartiteParams, n_mw: int, n_m: int, spin: int) -> int:
    levels = params.levels
    if not (0 <= n_mw < levels and 0 <= n_m < levels and spin in (0, 1)):
        raise ValueError("basis label outside the truncated space")
    return (n_mw * levels + n_m) * 2 + spin


def build_hamiltonian(params: TripartiteParams, frame: str = "lab") -> np.ndarray:
    """H/hbar in Hz (cyclic).

    ``frame="rotating"`` removes ``omega_mw`` times the total excitation
    number, which commutes with every term, leaving only the detunings and
    the beam-splitter couplings.
    """
    if params.fock_cutoff < 1:
        raise ValueError("fock_cutoff must be >= 1")
    a, b, s = operators(params)
    ad, bd, sd = a.conj().T, b.conj().T, s.conj().T
    if frame == "lab":
        w_mw, w_m, w_e = params.omega_mw, params.omega_m, params.omega_e
    elif frame == "rotating":
        w_mw = 0.0
        w_m = params.omega_m - params.omega_mw
        w_e = params.omega_e - params.omega_mw
    else:
        raise ValueError(f"unknown frame {frame!r}")
    h = w_mw * ad @ a + w_m * bd @ b + w_e * sd @ s
    h = h + params.g_mw_m * (a @ bd + ad @ b)
    h = h + params.g_m_e * (b @ sd + bd @ s)
    return h


def collapse_operators(params: TripartiteParams) -> list[tuple[np.ndarray, float]]:
    """(operator, rate in Hz) pairs: cavity decay, phonon decay, spin dephasing."""
    a, b, s = operators(params)
    return [
        (a, params.gamma_mw),
        (b, params.gamma_m),
        (s.conj().T @ s, params.gamma_e),
    ]


def liouvillian(params: TripartiteParams, frame: str = "rotating") -> np.ndarray:
    """Superoperator (angular units, 1/s) acting on row-major vec(rho)."""
    h = TWO_PI * build_hamiltonian(params, frame)
    dim = h.shape[0]
    eye = np.eye(dim, dtype=complex)
    # row-major: vec(A rho B) = kron(A, B.T) vec(rho)
    sup = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for c, rate in collapse_operators(params):
        if rate == 0:
            continue
        gamma = TWO_PI * rate
        cdc = c.conj().T @ c
        sup += (gamma / 2.0) * (
            2.0 * np.kron(c, c.conj())
            - np.kron(cdc, eye)
            - np.kron(eye, cdc.T)
        )
    return sup


def rk4_step(f: Callable[[np.ndarray], np.ndarray], y: np.ndarray, h: float) -> np.ndarray:
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


class DensityMatrix:
    """Dense density matrix, trace-normalized and validated on construction."""

    __slots__ = ("entries",)

    def __init__(self, entries: np.ndarray):
        rho = np.array(entries, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("density matrix must be square")
        herm_err = np.max(np.abs(rho - rho.conj().T)) if rho.size else 0.0
        if herm_err > HERMITIAN_TOL:
            raise ValueError(f"density matrix not Hermitian (max deviation {herm_err:.3g})")
        tr = np.trace(rho).real
        if not tr > 0:
            raise ValueError("density matrix must have positive trace")
        rho = rho / tr
        min_eig = float(np.linalg.eigvalsh(rho).min())
        if min_eig < -POSITIVITY_TOL:
            raise ValueError(f"density matrix not positive (min eigenvalue {min_eig:.3g})")
        rho.setflags(write=False)
        self.entries = rho

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def basis(cls, params: TripartiteParams, n_mw: int = 1, n_m: int = 0, spin: int = 0):
        """Projector onto |n_mw, n_m, spin>; defaults to one photon in the cavity."""
        rho = np.zeros((params.dim, params.dim), dtype=complex)
        i = basis_index(params, n_mw, n_m, spin)
        rho[i, i] = 1.0
        return cls(rho)

    def __repr__(self) -> str:
        return f"DensityMatrix(dim={self.dim})"


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    pop_mw: np.ndarray
    pop_m: np.ndarray
    pop_e: np.ndarray
    states: Optional[np.ndarray] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        n = len(self.times)
        if not (len(self.pop_mw) == len(self.pop_m) == len(self.pop_e) == n):
            raise ValueError("trajectory series must have equal lengths")
        if n > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("trajectory times must be strictly increasing")
        for name in ("pop_mw", "pop_m", "pop_e"):
            pop = getattr(self, name)
            if n and (pop.min() < -POSITIVITY_TOL or pop.max() > 1 + POSITIVITY_TOL):
                raise ValueError(f"{name} outside [0, 1]")

    def __len__(self) -> int:
        return len(self.times)

    def rows(self):
        return zip(self.times, self.pop_mw, self.pop_m, self.pop_e)


def state_diagnostics(states: np.ndarray) -> dict[str, float]:
    """Worst-case Hermiticity, trace and positivity errors over a stack of states."""
    herm = np.max(np.abs(states - np.conj(np.swapaxes(states, -1, -2))))
    traces = np.trace(states, axis1=-2, axis2=-1)
    herm_part = 0.5 * (states + np.conj(np.swapaxes(states, -1, -2)))
    min_eig = np.linalg.eigvalsh(herm_part).min()
    return {
        "max_hermitian_error": float(herm),
        "max_trace_error": float(np.max(np.abs(traces - 1.0))),
        "min_eigenvalue": float(min_eig),
    }


def evolve(
    rho0: DensityMatrix,
    params: TripartiteParams,
    t_end: float = DEFAULT_T_END,
    dt: float = DEFAULT_DT,
    frame: str = "rotating",
    keep_states: bool = False,
    substeps: Optional[int] = None,
) -> Trajectory:
    """Fixed-step RK4 integration of the master equation from ``rho0``.

    States are stored every ``dt``.  Each stored step is made of ``substeps``
    equal RK4 steps; by default enough of them that the stiffest mode of the
    generator moves by at most ``MAX_STEP_PHASE`` per substep.  The generator
    is linear, so one RK4 step is a fixed matrix, built by running the four
    RK4 stages on the identity.  Every stored state is checked for trace
    drift, Hermiticity and positivity; a violation raises
    :class:`IntegrationError`.
    """
    if rho0.dim != params.dim:
        raise ValueError(f"rho0 has dim {rho0.dim}, params need {params.dim}")
    if not dt > 0:
        raise ValueError("dt must be > 0")
    if not t_end >= dt:
        raise ValueError("t_end must be >= dt")
    n_steps = int(math.floor(t_end / dt + 1e-9))
    dim = params.dim

    sup = liouvillian(params, frame)
    if substeps is None:
        radius = float(np.max(np.abs(np.linalg.eigvals(sup))))
        substeps = max(1, math.ceil(radius * dt / MAX_STEP_PHASE))
    elif substeps < 1:
        raise ValueError("substeps must be >= 1")
    h = dt / substeps
    step = rk4_step(lambda y: sup @ y, np.eye(dim * dim, dtype=complex), h)
    step = np.linalg.matrix_power(step, substeps)

    states = np.empty((n_steps + 1, dim * dim), dtype=complex)
    states[0] = rho0.entries.ravel()
    diag = np.arange(dim) * (dim + 1)
    for k in range(n_steps):
        states[k + 1] = step @ states[k]
        drift = abs(states[k + 1, diag].sum() - 1.0)
        if not drift <= TRACE_DRIFT_LIMIT:
            raise IntegrationError(
                f"trace drift {drift:.3g} at t={(k + 1) * dt:.6g}s exceeds "
                f"{TRACE_DRIFT_LIMIT:g}; reduce dt (currently {dt:g}s, frame={frame})"
            )
    mats = states.reshape(n_steps + 1, dim, dim)
    diag_stats = state_diagnostics(mats)
    if (
        diag_stats["max_hermitian_error"] > HERMITIAN_TOL
        or diag_stats["max_trace_error"] > TRACE_TOL
        or diag_stats["min_eigenvalue"] < -POSITIVITY_TOL
    ):
        raise IntegrationError(
            f"unstable integration with dt={dt:g}s, frame={frame}: {diag_stats}"
        )

    a, b, s = operators(params)
    populations = mats.diagonal(axis1=1, axis2=2).real
    n_mw = np.diag(a.conj().T @ a).real
    n_m = np.diag(b.conj().T @ b).real
    n_e = np.diag(s.conj().T @ s).real
    times = np.arange(n_steps + 1) * dt
    return Trajectory(
        times=times,
        pop_mw=populations @ n_mw,
        pop_m=populations @ n_m,
        pop_e=populations @ n_e,
        states=mats if keep_states else None,
        metadata={
            "frame": frame,
            "dt_s": dt,
            "integrator": "rk4-fixed-step",
            "substeps": substeps,
            "spin_dissipator": SPIN_DISSIPATOR,
            **diag_stats,
        },
    )


def max_spin_population(traj: Trajectory) -> tuple[float, float]:
    """(peak spin population, first time it is reached)."""
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    i = int(np.argmax(traj.pop_e))
    return float(traj.pop_e[i]), float(traj.times[i])


def transfer_efficiency(
    params: TripartiteParams, t_end: float = DEFAULT_T_END, dt: float = DEFAULT_DT
) -> tuple[float, float]:
    """Peak spin population starting from one microwave photon."""
    traj = evolve(DensityMatrix.basis(params), params, t_end=t_end, dt=dt)
    return max_spin_population(traj)


def default_sweep_axes(n: int = 25) -> tuple[np.ndarray, np.ndarray]:
    """g_m_e from 0.1 to 10 MHz and Q_mw from 1e2 to 1e6, log-spaced."""
    return np.logspace(5, 7, n), np.logspace(2, 6, n)


@dataclass(frozen=True)
class SweepPoint:
    g_hz: float
    q_mw: float
    eta_e_mw: float


def _sweep_point(args) -> SweepPoint:
    g, q, base, t_end, dt = args
    params = base.with_(g_m_e=float(g), gamma_mw=base.omega_mw / float(q))
    try:
        eta, _ = transfer_efficiency(params, t_end=t_end, dt=dt)
    except IntegrationError as exc:
        raise IntegrationError(f"sweep point g={g:g} Hz, Q={q:g}: {exc}") from exc
    return SweepPoint(float(g), float(q), eta)


def sweep_transfer(
    g_m_e_values: Iterable[float],
    q_mw_values: Iterable[float],
    base: TripartiteParams = BASELINE_TRIPARTITE,
    t_end: float = DEFAULT_T_END,
    dt: float = DEFAULT_DT,
    workers: int = 1,
) -> list[SweepPoint]:
    """Peak spin population over a (g_m_e, Q_mw) grid, g outer, Q inner."""
    g_values = [float(g) for g in g_m_e_values]
    q_values = [float(q) for q in q_mw_values]
    if any(g < 0 for g in g_values) or any(q <= 0 for q in q_values):
        raise ValueError("sweep values must be positive")
    jobs = [(g, q, base, t_end, dt) for g in g_values for q in q_values]
    if workers <= 1 or len(jobs) < 2:
        return [_sweep_point(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sweep_point, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def single_excitation_block(params: TripartiteParams) -> np.ndarray:
    """Rotating-frame Hamiltonian restricted to {|100>, |010>, |001>}, in Hz."""
    h = build_hamiltonian(params, "rotating")
    idx = [
        basis_index(params, 1, 0, 0),
        basis_index(params, 0, 1, 0),
        basis_index(params, 0, 0, 1),
    ]
    return h[np.ix_(idx, idx)]
