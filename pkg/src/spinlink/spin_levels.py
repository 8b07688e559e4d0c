"""NV0 ground-state levels, effective Rabi rates and the optical efficiency chain.

Frequencies are cyclic (Hz).  The NV0 operator basis is ``orbit (x) spin``
with orbit ``{|+>, |->}`` first and spin ``{up, down}`` second, so the flat
index is ``2*orbit + spin``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import physical_constants

# Bohr magneton in Hz/T
MU_B_HZ_PER_T = physical_constants["Bohr magneton in Hz/T"][0]

BASIS_LABELS = (("+", "up"), ("+", "down"), ("-", "up"), ("-", "down"))

ADIABATIC_FACTOR = 10.0


@dataclass(frozen=True)
class Nv0Params:
    lambda_so: float
    g_spin: float = 2.0
    l_orb: float = 0.1
    eps_perp: float = 0.0
    d_perp: float = 0.0
    b_z: float = 0.0


_SZ_ORB = np.diag([1.0, -1.0])
_SZ_SPIN = 0.5 * np.diag([1.0, -1.0])
_L_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]])  # |+><-|
_L_MINUS = _L_PLUS.T


def nv0_hamiltonian(p: Nv0Params) -> np.ndarray:
    """4x4 NV0 ground-state Hamiltonian in Hz.

    Zeeman terms on spin and orbit, spin-orbit ``2 lambda L_z S_z`` and the
    perpendicular strain and electric-field terms, both acting as
    ``(L_- + L_+)`` on the orbit.  The two orbital terms are simply summed.
    """
    eye = np.eye(2)
    lz = np.kron(_SZ_ORB, eye)
    sz = np.kron(eye, _SZ_SPIN)
    lx = np.kron(_L_MINUS + _L_PLUS, eye)
    zeeman = MU_B_HZ_PER_T * p.b_z
    h = (
        p.g_spin * zeeman * sz
        + p.l_orb * zeeman * lz
        + 2.0 * p.lambda_so * lz @ sz
        + (p.eps_perp + p.d_perp) * lx
    )
    return h.astype(complex)


def sector_eigenvalues(p: Nv0Params) -> np.ndarray:
    """Closed-form spectrum, sorted: each spin sector is a 2x2 orbital problem."""
    zeeman = MU_B_HZ_PER_T * p.b_z
    perp = p.eps_perp + p.d_perp
    vals = []
    for s in (0.5, -0.5):
        offset = p.g_spin * zeeman * s
        diag = p.l_orb * zeeman + 2.0 * p.lambda_so * s
        r = math.hypot(diag, perp)
        vals += [offset + r, offset - r]
    return np.sort(np.array(vals))


@dataclass(frozen=True)
class Level:
    energy_hz: float
    vector: np.ndarray
    orbit_character: str
    spin_character: str


def _orbit_character(vec: np.ndarray) -> str:
    orb = vec.reshape(2, 2)
    w_plus = float(np.sum(np.abs(orb[0]) ** 2))
    x_state = np.array([1, 1]) / math.sqrt(2)
    y_state = np.array([1, -1]) / math.sqrt(2)
    reduced = orb @ orb.conj().T  # orbital reduced density matrix
    w_x = float(np.real(x_state @ reduced @ x_state))
    w_y = float(np.real(y_state @ reduced @ y_state))
    best = max((w_plus, "+"), (1 - w_plus, "-"), (w_x, "X"), (w_y, "Y"))
    return best[1] if best[0] > 0.9 else "mixed"


def _spin_character(vec: np.ndarray) -> str:
    orb = vec.reshape(2, 2)
    w_up = float(np.sum(np.abs(orb[:, 0]) ** 2))
    if w_up > 0.9:
        return "up"
    if w_up < 0.1:
        return "down"
    return "mixed"


def nv0_levels(p: Nv0Params) -> list[Level]:
    vals, vecs = np.linalg.eigh(nv0_hamiltonian(p))
    return [
        Level(float(v), vecs[:, i], _orbit_character(vecs[:, i]), _spin_character(vecs[:, i]))
        for i, v in enumerate(vals)
    ]


def orbital_mixing(
    p: Nv0Params, zero_threshold: float = 1e-3, high_threshold: float = 10.0
) -> tuple[float, str]:
    """Mixing angle of |+>, |-> toward |X>, |Y> in the lower doublet, and a regime label.

    The angle is ``0.5 * atan2(|eps + d|, |lambda + l mu_B B_z|)``: zero
    without strain, approaching pi/4 once strain dominates spin-orbit.  The
    regime is set by the ratio ``|eps + d| / |lambda|`` against the two
    thresholds.
    """
    perp = abs(p.eps_perp + p.d_perp)
    diag = abs(p.lambda_so + p.l_orb * MU_B_HZ_PER_T * p.b_z)
    angle = 0.5 * math.atan2(perp, diag)
    ratio = math.inf if p.lambda_so == 0 else perp / abs(p.lambda_so)
    if ratio < zero_threshold:
        regime = "zero-strain"
    elif ratio < high_threshold:
        regime = "moderate"
    else:
        regime = "high-strain"
    return angle, regime


def sideband_rabi(g_m_e: float, n_phonons: int, omega0: float, omega_m: float) -> float:
    """Effective sideband Rabi frequency g sqrt(n) Omega0 / omega_m."""
    if not omega_m > 0:
        raise ValueError("omega_m must be > 0")
    if n_phonons < 0:
        raise ValueError("n_phonons must be >= 0")
    return g_m_e * math.sqrt(n_phonons) * omega0 / omega_m


def three_level_rabi(
    g_m_e: float,
    omega0: float,
    delta: float,
    adiabatic_factor: float = ADIABATIC_FACTOR,
    strain_suppression: float = 1.0,
) -> tuple[float, bool]:
    """Two-quantum Rabi frequency g Omega0 / Delta through a detuned level.

    Returns the rate and whether ``|Delta| >= adiabatic_factor * max(g, Omega0)``.
    ``strain_suppression`` scales ``g_m_e`` for the reduced phonon absorption
    of strongly strained centers.
    """
    if delta == 0:
        raise ValueError("detuning must be non-zero")
    g = g_m_e * strain_suppression
    adiabatic = abs(delta) >= adiabatic_factor * max(abs(g), abs(omega0))
    return g * omega0 / delta, adiabatic


@dataclass(frozen=True)
class EfficiencyChain:
    g_opt: float
    kappa: float
    gamma_rad: float
    gamma_nonrad: float = 0.0
    gamma_dp: float = 0.0
    eta_coupling: float = 1.0
    eta_loss: float = 1.0
    eta_det: float = 1.0

    def __post_init__(self) -> None:
        for name in ("g_opt", "kappa", "gamma_rad", "gamma_nonrad", "gamma_dp"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        for name in ("eta_coupling", "eta_loss", "eta_det"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value!r}")


def optical_cooperativity(chain: EfficiencyChain) -> float:
    gamma = chain.gamma_rad + chain.gamma_nonrad + chain.gamma_dp
    if chain.kappa == 0 or gamma == 0:
        raise ValueError("cooperativity needs non-zero cavity decay and emitter linewidth")
    return 4.0 * chain.g_opt**2 / (chain.kappa * gamma)


def intrinsic_efficiency(cooperativity: float) -> float:
    """Coherent emission probability C / (1 + C)."""
    if math.isinf(cooperativity):
        return 1.0
    return cooperativity / (1.0 + cooperativity)


def fiber_transmission(db_per_km: float, length_m: float) -> float:
    return 10.0 ** (-db_per_km * length_m / 1000.0 / 10.0)


def transmission_efficiency(chain: EfficiencyChain) -> float:
    """Optical photon efficiency from emitter to detector."""
    return (
        intrinsic_efficiency(optical_cooperativity(chain))
        * chain.eta_coupling
        * chain.eta_loss
        * chain.eta_det
    )


def efficiency_breakdown(chain: EfficiencyChain) -> dict[str, float]:
    c = optical_cooperativity(chain)
    return {
        "c_opt_coh": c,
        "eta_int": intrinsic_efficiency(c),
        "eta_coupling": chain.eta_coupling,
        "eta_loss": chain.eta_loss,
        "eta_det": chain.eta_det,
        "eta_e_opt": transmission_efficiency(chain),
    }


def chain_for_cooperativity(c: float, kappa: float = 1e9, gamma: float = 1e8, **etas) -> EfficiencyChain:
    """An EfficiencyChain with the emitter coupling chosen to hit cooperativity ``c``."""
    g_opt = math.sqrt(c * kappa * gamma / 4.0)
    return EfficiencyChain(g_opt=g_opt, kappa=kappa, gamma_rad=gamma, **etas)
