import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from spinlink.lindblad import (
    BASELINE_TRIPARTITE,
    DensityMatrix,
    IntegrationError,
    Trajectory,
    TripartiteParams,
    basis_index,
    build_hamiltonian,
    evolve,
    liouvillian,
    max_spin_population,
    single_excitation_block,
    sweep_transfer,
    transfer_efficiency,
)

TWO_PI = 2 * math.pi


def lossless(**kw):
    return BASELINE_TRIPARTITE.with_(gamma_mw=0.0, gamma_m=0.0, gamma_e=0.0, **kw)


def three_level_populations(g1, g2, d_m, d_e, times):
    """Unitary single-excitation dynamics written out by hand."""
    h = TWO_PI * np.array([[0, g1, 0], [g1, d_m, g2], [0, g2, d_e]], dtype=complex)
    psi0 = np.array([1, 0, 0], dtype=complex)
    return np.array([np.abs(expm(-1j * h * t) @ psi0) ** 2 for t in times])


def explicit_rhs(params):
    """Master equation with plain matrix products, independent of the superoperator."""
    a, b, s = _ops(params.levels)
    ad, bd, sd = a.conj().T, b.conj().T, s.conj().T
    w_m = params.omega_m - params.omega_mw
    w_e = params.omega_e - params.omega_mw
    h = TWO_PI * (
        w_m * bd @ b + w_e * sd @ s
        + params.g_mw_m * (a @ bd + ad @ b)
        + params.g_m_e * (b @ sd + bd @ s)
    )
    jumps = [(a, params.gamma_mw), (b, params.gamma_m), (sd @ s, params.gamma_e)]
    d = h.shape[0]

    def rhs(_t, y):
        rho = y.reshape(d, d)
        out = -1j * (h @ rho - rho @ h)
        for c, g in jumps:
            cd = c.conj().T
            out += TWO_PI * g / 2 * (2 * c @ rho @ cd - cd @ c @ rho - rho @ cd @ c)
        return out.ravel()

    return rhs


def _ops(levels):
    dest = np.diag(np.sqrt(np.arange(1, levels)), 1).astype(complex)
    lower2 = np.array([[0, 1], [0, 0]], dtype=complex)
    i_l, i_2 = np.eye(levels), np.eye(2)
    return (
        np.kron(np.kron(dest, i_l), i_2),
        np.kron(np.kron(i_l, dest), i_2),
        np.kron(np.kron(i_l, i_l), lower2),
    )


class TestParams:
    def test_dimensions(self):
        assert BASELINE_TRIPARTITE.dim == 8
        assert BASELINE_TRIPARTITE.with_(fock_cutoff=2).dim == 18
        assert BASELINE_TRIPARTITE.q_mw == pytest.approx(1e4)

    @pytest.mark.parametrize("bad", [{"fock_cutoff": 0}, {"gamma_e": -1.0}, {"omega_m": 0.0}, {"g_m_e": math.nan}])
    def test_rejects_invalid(self, bad):
        with pytest.raises(ValueError):
            BASELINE_TRIPARTITE.with_(**bad)

    def test_basis_index(self):
        assert basis_index(BASELINE_TRIPARTITE, 1, 0, 0) == 4
        assert basis_index(BASELINE_TRIPARTITE, 0, 1, 0) == 2
        assert basis_index(BASELINE_TRIPARTITE, 0, 0, 1) == 1
        with pytest.raises(ValueError):
            basis_index(BASELINE_TRIPARTITE, 2, 0, 0)


class TestOperators:
    def test_hamiltonian_hermitian(self):
        for frame in ("lab", "rotating"):
            h = build_hamiltonian(BASELINE_TRIPARTITE.with_(fock_cutoff=2), frame)
            assert np.allclose(h, h.conj().T, atol=0)

    def test_single_excitation_block(self):
        block = single_excitation_block(BASELINE_TRIPARTITE)
        assert np.allclose(block, [[0, 1e6, 0], [1e6, 0, 1e6], [0, 1e6, 0]])

    def test_liouvillian_trace_preserving(self):
        sup = liouvillian(BASELINE_TRIPARTITE.with_(fock_cutoff=2))
        d = BASELINE_TRIPARTITE.with_(fock_cutoff=2).dim
        trace_row = np.eye(d).ravel()
        assert np.max(np.abs(trace_row @ sup)) < 1e-6 * np.max(np.abs(sup))

    def test_unknown_frame(self):
        with pytest.raises(ValueError):
            build_hamiltonian(BASELINE_TRIPARTITE, "interaction")


class TestDensityMatrix:
    def test_basis(self):
        rho = DensityMatrix.basis(BASELINE_TRIPARTITE, 1, 0, 0)
        assert rho.entries[4, 4] == 1
        assert np.trace(rho.entries) == 1

    def test_rejects_non_hermitian(self):
        m = np.eye(8, dtype=complex) / 8
        m[0, 1] = 0.1
        with pytest.raises(ValueError):
            DensityMatrix(m)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            DensityMatrix(np.diag([1.5, -0.5, 0, 0, 0, 0, 0, 0]))


class TestEvolution:
    def test_lossless_matches_matrix_exponential(self):
        p = lossless()
        traj = evolve(DensityMatrix.basis(p), p, t_end=2e-6, dt=1e-9)
        oracle = three_level_populations(1e6, 1e6, 0.0, 0.0, traj.times)
        assert np.max(np.abs(traj.pop_mw - oracle[:, 0])) < 1e-6
        assert np.max(np.abs(traj.pop_m - oracle[:, 1])) < 1e-6
        assert np.max(np.abs(traj.pop_e - oracle[:, 2])) < 1e-6

    def test_lossless_with_detuning(self):
        p = lossless(omega_m=5.0003e9, omega_e=4.9998e9, g_m_e=0.7e6)
        traj = evolve(DensityMatrix.basis(p), p, t_end=1e-6, dt=1e-9)
        oracle = three_level_populations(1e6, 0.7e6, 0.3e6, -0.2e6, traj.times)
        assert np.max(np.abs(traj.pop_e - oracle[:, 2])) < 1e-6

    def test_lossless_peak_is_complete_transfer(self):
        # resonant chain with equal couplings: full transfer at t = 1/(2 sqrt(2) g)
        eta, t = transfer_efficiency(lossless(), t_end=1e-6, dt=1e-10)
        assert eta == pytest.approx(1.0, abs=1e-4)
        assert t == pytest.approx(1 / (2 * math.sqrt(2) * 1e6), abs=2e-10)

    @pytest.mark.parametrize("cutoff", [1, 2])
    def test_dissipative_matches_independent_solver(self, cutoff):
        p = BASELINE_TRIPARTITE.with_(fock_cutoff=cutoff, gamma_mw=2e6, gamma_e=50e3)
        traj = evolve(DensityMatrix.basis(p), p, t_end=1e-6, dt=1e-8, keep_states=True)
        sol = solve_ivp(
            explicit_rhs(p), (0, 1e-6), DensityMatrix.basis(p).entries.ravel(),
            t_eval=traj.times, method="DOP853", rtol=1e-11, atol=1e-13,
        )
        ref = sol.y.T.reshape(traj.states.shape)
        assert np.max(np.abs(traj.states - ref)) < 1e-6

    def test_spin_dephasing_is_pure(self):
        # dephasing only: no population changes, coherence decays at gamma_e (angular)
        p = lossless(g_mw_m=0.0, g_m_e=0.0).with_(gamma_e=100e3)
        psi = np.zeros(p.dim, dtype=complex)
        psi[basis_index(p, 0, 0, 0)] = psi[basis_index(p, 0, 0, 1)] = 1 / math.sqrt(2)
        traj = evolve(DensityMatrix(np.outer(psi, psi.conj())), p, t_end=2e-6, dt=1e-8, keep_states=True)
        assert np.allclose(traj.pop_e, 0.5, atol=1e-12)
        coh = np.abs(traj.states[:, basis_index(p, 0, 0, 0), basis_index(p, 0, 0, 1)])
        expected = 0.5 * np.exp(-TWO_PI * 100e3 * traj.times / 2)
        assert np.max(np.abs(coh - expected)) < 1e-8

    def test_cavity_decay_rate(self):
        p = lossless(g_mw_m=0.0).with_(gamma_mw=1e6)
        traj = evolve(DensityMatrix.basis(p), p, t_end=5e-7, dt=1e-9)
        assert np.allclose(traj.pop_mw, np.exp(-TWO_PI * 1e6 * traj.times), atol=1e-8)

    def test_dt_convergence(self):
        eta1, _ = transfer_efficiency(BASELINE_TRIPARTITE, dt=1e-9)
        eta2, _ = transfer_efficiency(BASELINE_TRIPARTITE, dt=0.5e-9)
        assert abs(eta1 - eta2) < 1e-4

    def test_truncation_insensitivity(self):
        eta1, t1 = transfer_efficiency(BASELINE_TRIPARTITE)
        eta2, t2 = transfer_efficiency(BASELINE_TRIPARTITE.with_(fock_cutoff=2))
        assert abs(eta1 - eta2) < 1e-6
        assert t1 == t2

    def test_lab_and_rotating_frames_agree(self):
        p = BASELINE_TRIPARTITE
        rot = evolve(DensityMatrix.basis(p), p, t_end=5e-8, dt=1e-10, frame="rotating")
        lab = evolve(DensityMatrix.basis(p), p, t_end=5e-8, dt=1e-10, frame="lab")
        for name in ("pop_mw", "pop_m", "pop_e"):
            assert np.max(np.abs(getattr(rot, name) - getattr(lab, name))) < 1e-6

    def test_trajectory_valid_states(self):
        traj = evolve(DensityMatrix.basis(BASELINE_TRIPARTITE), BASELINE_TRIPARTITE, keep_states=True)
        md = traj.metadata
        assert md["max_hermitian_error"] < 1e-10
        assert md["max_trace_error"] < 1e-8
        assert md["min_eigenvalue"] > -1e-8
        assert md["frame"] == "rotating"
        assert len(traj) == 2001

    def test_unstable_step_raises(self):
        with pytest.raises(IntegrationError):
            evolve(DensityMatrix.basis(BASELINE_TRIPARTITE), BASELINE_TRIPARTITE, t_end=2e-6, dt=1e-7, substeps=1)

    def test_mismatched_dimension(self):
        with pytest.raises(ValueError):
            evolve(DensityMatrix.basis(BASELINE_TRIPARTITE), BASELINE_TRIPARTITE.with_(fock_cutoff=2))

    def test_max_spin_population_empty(self):
        empty = Trajectory(np.array([]), np.array([]), np.array([]), np.array([]))
        with pytest.raises(ValueError):
            max_spin_population(empty)

    @given(
        st.floats(1e5, 5e6),
        st.floats(1e4, 5e6),
        st.floats(0.0, 1e5),
    )
    @settings(max_examples=15, deadline=None)
    def test_populations_bounded(self, g, gamma_mw, gamma_e):
        p = BASELINE_TRIPARTITE.with_(g_m_e=g, gamma_mw=gamma_mw, gamma_e=gamma_e)
        traj = evolve(DensityMatrix.basis(p), p, t_end=5e-7, dt=1e-9)
        total = traj.pop_mw + traj.pop_m + traj.pop_e
        assert np.all(total <= 1 + 1e-9)
        assert np.all(np.diff(total) <= 1e-9)  # excitations only leak out


class TestSweep:
    def test_grid_order_and_parallel_agreement(self):
        g = [1e5, 1e6]
        q = [1e3, 1e4]
        serial = sweep_transfer(g, q, t_end=1e-6)
        pooled = sweep_transfer(g, q, t_end=1e-6, workers=2)
        assert [(s.g_hz, s.q_mw) for s in serial] == [(1e5, 1e3), (1e5, 1e4), (1e6, 1e3), (1e6, 1e4)]
        assert serial == pooled

    def test_rejects_nonpositive_q(self):
        with pytest.raises(ValueError):
            sweep_transfer([1e6], [0.0])
