import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinlink.spin_levels import (
    MU_B_HZ_PER_T,
    EfficiencyChain,
    Nv0Params,
    chain_for_cooperativity,
    efficiency_breakdown,
    fiber_transmission,
    intrinsic_efficiency,
    nv0_hamiltonian,
    nv0_levels,
    optical_cooperativity,
    orbital_mixing,
    sector_eigenvalues,
    sideband_rabi,
    three_level_rabi,
    transmission_efficiency,
)

LAMBDA = 5e9
X = np.array([1, 1]) / math.sqrt(2)
Y = np.array([1, -1]) / math.sqrt(2)


def oracle_spectrum(lam, g, l, eps, d, bz):
    """Per spin sector: [[z_s + l mu B + lam', e], [e, z_s - l mu B - lam']], mean +- half-gap."""
    mu = MU_B_HZ_PER_T * bz
    out = []
    for s in (0.5, -0.5):
        m = np.array(
            [[g * mu * s + l * mu + 2 * lam * s, eps + d],
             [eps + d, g * mu * s - l * mu - 2 * lam * s]]
        )
        mean = (m[0, 0] + m[1, 1]) / 2
        half_gap = math.hypot((m[0, 0] - m[1, 1]) / 2, m[0, 1])
        out += [mean + half_gap, mean - half_gap]
    return np.sort(out)


class TestNv0:
    def test_zero_field_zero_strain(self):
        levels = nv0_levels(Nv0Params(lambda_so=LAMBDA))
        energies = [lv.energy_hz for lv in levels]
        assert energies == pytest.approx([-LAMBDA, -LAMBDA, LAMBDA, LAMBDA])
        lower = {(lv.orbit_character, lv.spin_character) for lv in levels[:2]}
        upper = {(lv.orbit_character, lv.spin_character) for lv in levels[2:]}
        assert lower == {("+", "down"), ("-", "up")}
        assert upper == {("+", "up"), ("-", "down")}

    def test_hermitian(self):
        h = nv0_hamiltonian(Nv0Params(LAMBDA, eps_perp=1e9, d_perp=2e8, b_z=0.3))
        assert np.allclose(h, h.conj().T, atol=0)

    @given(
        st.floats(-1e10, 1e10),
        st.floats(0.0, 3.0),
        st.floats(0.0, 1.0),
        st.floats(-1e11, 1e11),
        st.floats(-1e10, 1e10),
        st.floats(-2.0, 2.0),
    )
    @settings(max_examples=100, deadline=None)
    def test_spectrum_matches_two_by_two_oracle(self, lam, g, l, eps, d, bz):
        p = Nv0Params(lam, g_spin=g, l_orb=l, eps_perp=eps, d_perp=d, b_z=bz)
        numeric = np.linalg.eigvalsh(nv0_hamiltonian(p))
        expected = oracle_spectrum(lam, g, l, eps, d, bz)
        scale = max(np.max(np.abs(expected)), 1.0)
        assert np.max(np.abs(numeric - expected)) <= 1e-10 * scale
        assert np.max(np.abs(sector_eigenvalues(p) - expected)) <= 1e-10 * scale

    def test_high_strain_gives_x_y_orbitals(self):
        levels = nv0_levels(Nv0Params(LAMBDA, eps_perp=100 * LAMBDA))
        for lv in levels:
            orb = lv.vector.reshape(2, 2)
            reduced = orb @ orb.conj().T
            overlap = max(np.real(X @ reduced @ X), np.real(Y @ reduced @ Y))
            assert overlap > 0.99
            assert lv.orbit_character in ("X", "Y")

    def test_mixing_regimes(self):
        angle, regime = orbital_mixing(Nv0Params(LAMBDA))
        assert angle == 0.0 and regime == "zero-strain"
        angle, regime = orbital_mixing(Nv0Params(LAMBDA, eps_perp=LAMBDA))
        assert angle == pytest.approx(math.pi / 8) and regime == "moderate"
        angle, regime = orbital_mixing(Nv0Params(LAMBDA, eps_perp=100 * LAMBDA))
        assert regime == "high-strain"
        assert math.pi / 4 - angle < 0.01

    def test_mixing_angle_matches_eigenvector(self):
        # lower spin-up eigenvector is cos(a)|-> + sin(a)|+> up to sign
        p = Nv0Params(LAMBDA, eps_perp=0.7 * LAMBDA)
        angle, _ = orbital_mixing(p)
        vals, vecs = np.linalg.eigh(nv0_hamiltonian(p))
        up = [i for i in range(4) if np.sum(np.abs(vecs[[0, 2], i]) ** 2) > 0.99]
        low = min(up, key=lambda i: vals[i])
        w_plus = abs(vecs[0, low]) ** 2
        assert w_plus == pytest.approx(math.sin(angle) ** 2, abs=1e-12)


class TestDrives:
    def test_sideband(self):
        assert sideband_rabi(1e6, 1, 1e9, 5e9) == pytest.approx(0.2e6)
        assert sideband_rabi(10e6, 1, 1e9, 5e9) == pytest.approx(2e6)
        assert sideband_rabi(1e6, 0, 1e9, 5e9) == 0.0
        assert sideband_rabi(1e6, 4, 1e9, 5e9) == pytest.approx(0.4e6)

    def test_sideband_invalid(self):
        with pytest.raises(ValueError):
            sideband_rabi(1e6, 1, 1e9, 0.0)

    def test_three_level(self):
        rate, adiabatic = three_level_rabi(1e6, 100e6, 1e9)
        assert rate == pytest.approx(0.1e6) and adiabatic
        rate, _ = three_level_rabi(10e6, 100e6, 1e9)
        assert rate == pytest.approx(1e6)
        assert three_level_rabi(0.0, 100e6, 1e9)[0] == 0.0

    def test_three_level_non_adiabatic(self):
        _, adiabatic = three_level_rabi(1e6, 100e6, 5e8)
        assert not adiabatic

    def test_strain_suppression(self):
        rate, _ = three_level_rabi(1e6, 100e6, 1e9, strain_suppression=0.3)
        assert rate == pytest.approx(0.03e6)

    def test_zero_detuning(self):
        with pytest.raises(ValueError):
            three_level_rabi(1e6, 100e6, 0.0)


class TestEfficiencyChain:
    def test_cooperativity_100(self):
        chain = chain_for_cooperativity(100.0)
        assert optical_cooperativity(chain) == pytest.approx(100.0)
        assert intrinsic_efficiency(100.0) == pytest.approx(0.990099, abs=1e-6)

    def test_zero_coupling(self):
        chain = EfficiencyChain(g_opt=0.0, kappa=1e9, gamma_rad=1e8)
        assert optical_cooperativity(chain) == 0.0

    def test_doubling_coupling_quadruples_c(self):
        a = EfficiencyChain(g_opt=1e8, kappa=1e9, gamma_rad=1e8)
        b = EfficiencyChain(g_opt=2e8, kappa=1e9, gamma_rad=1e8)
        assert optical_cooperativity(b) == pytest.approx(4 * optical_cooperativity(a))

    def test_fiber(self):
        assert fiber_transmission(10.0, 5.0) == pytest.approx(0.98855, abs=1e-5)
        assert fiber_transmission(10.0, 0.0) == 1.0

    def test_full_chain(self):
        chain = chain_for_cooperativity(100.0, eta_coupling=0.9, eta_loss=0.99, eta_det=0.99)
        assert transmission_efficiency(chain) == pytest.approx(0.87, abs=0.005)
        bd = efficiency_breakdown(chain)
        assert bd["eta_e_opt"] == pytest.approx(bd["eta_int"] * 0.9 * 0.99 * 0.99)

    def test_ideal_limit(self):
        assert intrinsic_efficiency(math.inf) == 1.0

    @given(st.floats(0.0, 1e6), st.floats(0.0, 1e6))
    def test_intrinsic_monotone(self, c1, c2):
        lo, hi = sorted((c1, c2))
        assert intrinsic_efficiency(lo) <= intrinsic_efficiency(hi)

    def test_rejects_bad_efficiency(self):
        with pytest.raises(ValueError):
            EfficiencyChain(g_opt=1.0, kappa=1.0, gamma_rad=1.0, eta_det=1.5)
