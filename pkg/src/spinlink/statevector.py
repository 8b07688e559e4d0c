"""Pure-state algebra of single- and two-photon heralded spin-spin entanglement.

Each node's spin emits a photon into its own path only from ``|0>``.  The
two paths meet on a 50:50 beamsplitter with the convention

    a_A -> (a_A + a_B) / sqrt(2),   a_B -> (a_A - a_B) / sqrt(2)

and number-resolving detectors sit on both output ports.  The module is
lossless; photon loss belongs to the optical efficiency in :mod:`rates`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

SQRT_HALF = 1.0 / math.sqrt(2.0)
NORM_TOL = 1e-12

CLICK_PATTERNS = ("detectorA", "detectorB", "none", "both")

# Two-mode Fock basis after the beamsplitter (photons at output A, output B).
OUTPUT_BASIS = ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))
_OUT_INDEX = {occ: i for i, occ in enumerate(OUTPUT_BASIS)}

PSI_PLUS = np.array([0, 1, 1, 0], dtype=complex) * SQRT_HALF
PSI_MINUS = np.array([0, 1, -1, 0], dtype=complex) * SQRT_HALF


@dataclass(frozen=True)
class DualRailState:
    """Amplitudes over |spin_A, spin_B, n_A, n_B>, each index in {0, 1}.

    Flat index is ``8*spin_A + 4*spin_B + 2*n_A + n_B``.
    """

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (16,):
            raise ValueError(f"dual-rail state must have 16 amplitudes, got shape {amps.shape}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"dual-rail state not normalized (norm {norm!r})")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(2, 2, 2, 2)


@dataclass(frozen=True)
class HeraldedOutcome:
    click_pattern: str
    probability: float
    post_state: Optional[np.ndarray]
    relative_phase: float = 0.0


def _as_spin_pair(spin_state) -> np.ndarray:
    if spin_state is None:
        plus = np.array([1, 1], dtype=complex) * SQRT_HALF
        return np.kron(plus, plus)
    if isinstance(spin_state, (tuple, list)) and len(spin_state) == 2:
        a = np.asarray(spin_state[0], dtype=complex)
        b = np.asarray(spin_state[1], dtype=complex)
        if a.shape == (2,) and b.shape == (2,):
            return np.kron(a, b)
    vec = np.asarray(spin_state, dtype=complex)
    if vec.shape != (4,):
        raise ValueError("spin state must be a 4-vector or a pair of 2-vectors")
    return vec


def emit_entangled_photon(spin_state=None) -> DualRailState:
    """Let each node's ``|0>`` spin component emit one photon into its path.

    ``spin_state`` is a pair of single-spin vectors or a joint 4-vector over
    ``|spin_A spin_B>``; the default is ``(|0> + |1>)/sqrt(2)`` on both nodes.
    """
    spins = _as_spin_pair(spin_state)
    norm = np.linalg.norm(spins)
    if norm == 0:
        raise ValueError("spin state has zero norm")
    spins = spins / norm
    out = np.zeros((2, 2, 2, 2), dtype=complex)
    for sa in (0, 1):
        for sb in (0, 1):
            out[sa, sb, 1 - sa, 1 - sb] = spins[2 * sa + sb]
    return DualRailState(out.ravel())


def apply_path_phase(state: DualRailState, theta_a: float, theta_b: float) -> DualRailState:
    """Fiber phases: a photon in path A picks up exp(i theta_a), path B exp(i theta_b)."""
    t = state.tensor().copy()
    t[:, :, 1, :] *= np.exp(1j * theta_a)
    t[:, :, :, 1] *= np.exp(1j * theta_b)
    return DualRailState(t.ravel())


def _fock(n: int, m: int) -> np.ndarray:
    v = np.zeros(len(OUTPUT_BASIS), dtype=complex)
    v[_OUT_INDEX[(n, m)]] = 1.0
    return v


def beamsplitter_unitary() -> np.ndarray:
    """50:50 beamsplitter on the two-mode space with at most two photons.

    Columns are input Fock states and rows output Fock states, both ordered as
    ``OUTPUT_BASIS``.  Built from the creation-operator map
    ``a_A^dag -> (c_A^dag + c_B^dag)/sqrt2``, ``a_B^dag -> (c_A^dag - c_B^dag)/sqrt2``.
    """
    s = SQRT_HALF
    cols = {
        (0, 0): _fock(0, 0),
        (1, 0): s * (_fock(1, 0) + _fock(0, 1)),
        (0, 1): s * (_fock(1, 0) - _fock(0, 1)),
        # (a_A^dag)^2 / sqrt2 |0> -> (c_A + c_B)^2 / (2 sqrt2) |0>
        (2, 0): 0.5 * _fock(2, 0) + s * _fock(1, 1) + 0.5 * _fock(0, 2),
        # a_A^dag a_B^dag |0> -> (c_A^2 - c_B^2)/2 |0>  (Hong-Ou-Mandel)
        (1, 1): s * (_fock(2, 0) - _fock(0, 2)),
        (0, 2): 0.5 * _fock(2, 0) - s * _fock(1, 1) + 0.5 * _fock(0, 2),
    }
    return np.column_stack([cols[occ] for occ in OUTPUT_BASIS])


def _pattern_of(occ: tuple[int, int]) -> str:
    n_a, n_b = occ
    if n_a + n_b == 0:
        return "none"
    if n_a + n_b == 2:
        return "both"
    return "detectorA" if n_a == 1 else "detectorB"


def beamsplit_and_herald(state: DualRailState, relative_phase: float = 0.0) -> list[HeraldedOutcome]:
    """Interfere the two paths and split the result by detection pattern.

    ``"both"`` collects every two-photon event, whichever ports fire.  Only
    single-click outcomes carry a spin-spin post state.
    """
    u = beamsplitter_unitary()
    t = state.tensor()
    # joint amplitudes: (spin pair) x (output Fock state)
    joint = np.zeros((4, len(OUTPUT_BASIS)), dtype=complex)
    for n_a in (0, 1):
        for n_b in (0, 1):
            spin_amps = t[:, :, n_a, n_b].ravel()
            joint += np.outer(spin_amps, u[:, _OUT_INDEX[(n_a, n_b)]])
    outcomes = []
    for pattern in CLICK_PATTERNS:
        cols = [i for i, occ in enumerate(OUTPUT_BASIS) if _pattern_of(occ) == pattern]
        prob = float(np.sum(np.abs(joint[:, cols]) ** 2))
        post = None
        if pattern in ("detectorA", "detectorB") and prob > 0:
            vec = joint[:, cols[0]]
            post = vec / np.linalg.norm(vec)
        outcomes.append(HeraldedOutcome(pattern, prob, post, relative_phase))
    return outcomes


def bell_fidelity(post_state: np.ndarray, target: np.ndarray = PSI_PLUS) -> float:
    return float(abs(np.vdot(target, post_state)) ** 2)


def _outcome(outcomes: Sequence[HeraldedOutcome], pattern: str) -> HeraldedOutcome:
    for o in outcomes:
        if o.click_pattern == pattern:
            return o
    raise KeyError(pattern)


def run_single_photon_protocol(theta: float, pattern: str = "detectorA") -> HeraldedOutcome:
    """One emission round with path phase difference ``theta``; returns one click outcome."""
    state = apply_path_phase(emit_entangled_photon(), 0.0, theta)
    return _outcome(beamsplit_and_herald(state, relative_phase=theta), pattern)


def bit_flip_both(spins: np.ndarray) -> np.ndarray:
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    return np.kron(x, x) @ spins


def run_two_photon_protocol(
    theta: float, first: str = "detectorA", second: str = "detectorA"
) -> HeraldedOutcome:
    """Two emission rounds with a pi pulse on both spins in between.

    The same fiber phases act in both rounds, so the phase difference ends
    up global.  The returned probability is the joint herald probability of
    the two click patterns; the post state is ``Psi+`` when both rounds click
    the same detector and ``Psi-`` otherwise.
    """
    round1 = run_single_photon_protocol(theta, first)
    spins = bit_flip_both(round1.post_state)
    state = apply_path_phase(emit_entangled_photon(spins), 0.0, theta)
    round2 = _outcome(beamsplit_and_herald(state, relative_phase=theta), second)
    return HeraldedOutcome(
        click_pattern=f"{first}+{second}",
        probability=round1.probability * round2.probability,
        post_state=round2.post_state,
        relative_phase=theta,
    )


def two_photon_outcomes(theta: float) -> list[tuple[HeraldedOutcome, np.ndarray]]:
    """All four single-click pattern pairs, each with its expected Bell state."""
    out = []
    for first in ("detectorA", "detectorB"):
        for second in ("detectorA", "detectorB"):
            target = PSI_PLUS if first == second else PSI_MINUS
            out.append((run_two_photon_protocol(theta, first, second), target))
    return out
