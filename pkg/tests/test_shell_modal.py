import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from vsbwec.presets import RIGID_SHELL, SHELL_DEFAULTS
from vsbwec.shell_modal import (
    ModalBasis,
    ShellModelError,
    ShellProperties,
    assemble_structural,
    basis_at,
    freq_param,
    legendre_pair,
    natural_freq,
    natural_freq_from_param,
)

PROPS = ShellProperties(**{**SHELL_DEFAULTS, "h": 0.1})


def props(**kw):
    return ShellProperties(**{**SHELL_DEFAULTS, "h": 0.1, **kw})


class TestShellProperties:
    def test_mass(self):
        p = props()
        assert p.m_total == pytest.approx(4 * math.pi * 4 * 0.1 * 900)

    @pytest.mark.parametrize("kw", [
        {"h": 0.4}, {"r": -1.0}, {"E": 0.0}, {"nu": 0.5}, {"nu": -0.1}, {"rho": 0.0},
        {"N": 0}, {"alpha_d": -1.0}, {"beta_d": -1e-3},
    ])
    def test_rejects_invalid(self, kw):
        with pytest.raises(ShellModelError):
            props(**kw)


class TestLegendre:
    def test_order_zero(self):
        p, dp = legendre_pair(0, np.linspace(0, math.pi, 7))
        assert np.all(p == 1.0) and np.all(dp == 0.0)

    def test_order_one_equator(self):
        p, dp = legendre_pair(1, math.pi / 2)
        assert p == pytest.approx(0.0, abs=1e-15)
        assert dp == pytest.approx(-1.0, abs=1e-15)

    def test_order_three_against_recurrence(self):
        p, dp = legendre_pair(3, 0.7)
        p_ref, dp_ref = oracles.legendre_bonnet(3, 0.7)
        assert p == pytest.approx(p_ref, rel=1e-12)
        assert dp == pytest.approx(dp_ref, rel=1e-12)

    @given(st.integers(0, 12), st.floats(0.01, math.pi - 0.01))
    def test_matches_recurrence(self, n, phi):
        p, dp = legendre_pair(n, phi)
        p_ref, dp_ref = oracles.legendre_bonnet(n, phi)
        assert p == pytest.approx(p_ref, rel=1e-10, abs=1e-12)
        assert dp == pytest.approx(dp_ref, rel=1e-9, abs=1e-10)

    def test_derivative_is_analytic_not_differenced(self):
        # agrees with a central difference only to the difference's own error
        phi, h = 1.1, 1e-5
        _, dp = legendre_pair(4, phi)
        fd = (legendre_pair(4, phi + h)[0] - legendre_pair(4, phi - h)[0]) / (2 * h)
        assert dp == pytest.approx(fd, rel=1e-8)

    def test_negative_order(self):
        with pytest.raises(ValueError):
            legendre_pair(-1, 0.3)


class TestFrequencyParameter:
    def test_rigid_mode_is_exactly_zero(self):
        for kw in ({}, {"nu": 0.0}, {"h": 0.3}, {"E": 1e10}):
            assert freq_param(1, props(**kw))[1] == 0.0

    def test_breathing_mode_against_transcription(self):
        p = props(nu=0.3, h=0.1)  # h/r = 0.05
        plus, minus = freq_param(0, p)
        ref = oracles.freq_param_scalar(0, 0.3, 0.1, 2.0)
        assert plus == pytest.approx(ref[0], rel=1e-14)
        assert minus == pytest.approx(ref[1], rel=1e-14)

    def test_frozen_values(self):
        basis = ModalBasis(PROPS)
        np.testing.assert_allclose(basis.omega2, [-0.8857294389541304, 0.0, 0.65493445, 0.92549164],
                                   rtol=1e-8, atol=1e-15)
        np.testing.assert_allclose(basis.radial_factor, [-1.08031283, 0.0, 4.36540029, 28.56902038],
                                   rtol=1e-8, atol=1e-15)

    def test_membrane_branch_insensitive_to_thickness(self):
        vals = [freq_param(2, props(nu=0.0, h=h))[1] for h in (1e-3, 1e-4, 1e-5)]
        for v in vals[1:]:
            assert v == pytest.approx(vals[0], rel=1e-6)

    def test_printed_form_limited_to_three_modes(self):
        freq_param(2, props(), form="printed")
        with pytest.raises(ShellModelError, match="discriminant"):
            freq_param(3, props(), form="printed")

    def test_unknown_form(self):
        with pytest.raises(ValueError):
            freq_param(2, props(), form="exotic")

    @given(st.integers(0, 8), st.floats(0.0, 0.49), st.floats(0.01, 0.39))
    def test_thin_shell_always_real(self, n, nu, h):
        plus, minus = freq_param(n, props(nu=nu, h=h))
        assert plus >= minus
        ref = oracles.freq_param_scalar(n, nu, h, 2.0)
        assert minus == pytest.approx(ref[1], rel=1e-9, abs=1e-12)


class TestNaturalFrequency:
    def test_direct_formula(self):
        assert natural_freq_from_param(1.0, 10e9, 2.0, 900.0) == pytest.approx(1666.6667, rel=1e-6)

    def test_rigid_mode_rejected(self):
        with pytest.raises(ShellModelError, match="rigid"):
            natural_freq(1, PROPS)

    def test_doubling_radius_halves_frequency(self):
        w = natural_freq_from_param(0.6, 2e5, 2.0, 900.0)
        assert natural_freq_from_param(0.6, 2e5, 4.0, 900.0) == pytest.approx(w / 2, rel=1e-14)

    def test_imaginary_frequency_rejected(self):
        with pytest.raises(ShellModelError):
            natural_freq(0, PROPS)  # Omega^2 < 0 for the breathing mode

    def test_bending_branch(self):
        assert natural_freq(2, PROPS, branch="bending") > 0


class TestBasis:
    def test_index_map(self):
        b = ModalBasis(PROPS)
        assert b.mode_index_map == ((0, "membrane"), (1, "membrane"), (2, "membrane"), (3, "membrane"))
        assert b.N == 4

    def test_rigid_mode_shape(self):
        b = ModalBasis(PROPS, A_norm=1.7)
        phi = np.linspace(0, math.pi, 11)
        psi_phi, psi_r = basis_at(b, phi)
        np.testing.assert_allclose(psi_r[:, 1], 0.0, atol=0)
        np.testing.assert_allclose(psi_phi[:, 1], -1.7 * np.sin(phi), atol=1e-15)

    def test_tangential_vanishes_at_pole(self):
        psi_phi, _ = basis_at(ModalBasis(PROPS), [0.0])
        np.testing.assert_allclose(psi_phi, 0.0, atol=1e-15)

    def test_breathing_mode(self):
        phi = np.linspace(0, math.pi, 17)
        psi_phi, psi_r = basis_at(ModalBasis(PROPS), phi)
        assert np.all(psi_phi[:, 0] == 0.0)
        np.testing.assert_allclose(psi_r[:, 0], psi_r[0, 0], rtol=0, atol=0)

    def test_singular_radial_amplitude_rejected(self, monkeypatch):
        import vsbwec.shell_modal as sm
        monkeypatch.setattr(sm, "freq_param", lambda n, p, form="thin_shell": (2.0, 1.0))
        with pytest.raises(ShellModelError, match="singular"):
            sm.ModalBasis(PROPS)


class TestStructural:
    @pytest.mark.parametrize("N", range(1, 7))
    @pytest.mark.parametrize("base", [SHELL_DEFAULTS, RIGID_SHELL])
    def test_definiteness_and_symmetry(self, N, base):
        p = ShellProperties(**{"h": 0.1, **base, "N": N})
        S = assemble_structural(ModalBasis(p))
        np.linalg.cholesky(S.M_ee)
        assert np.linalg.eigvalsh(S.K_ee).min() >= -1e-9 * np.linalg.norm(S.K_ee)
        assert np.array_equal(S.M_ee, S.M_ee.T) and np.array_equal(S.K_ee, S.K_ee.T)
        off = S.M_ee - np.diag(np.diag(S.M_ee))
        assert np.abs(off).max() < 1e-8 * np.diag(S.M_ee).max()

    def test_breathing_mass_against_dense_trapezoid(self):
        p = props(N=1)
        b = ModalBasis(p)
        M = assemble_structural(b).M_ee
        c0 = b.radial_factor[0]
        analytic = 2 * math.pi * p.rho * p.h * p.r**2 * 2 * c0**2
        ref = oracles.mass_trapezoid(0, p.nu, b.omega2[0], p.rho, p.h, p.r)
        assert M[0, 0] == pytest.approx(analytic, rel=1e-12)
        assert M[0, 0] == pytest.approx(ref, rel=1e-9)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_mass_diagonal_against_dense_trapezoid(self, n):
        b = ModalBasis(PROPS)
        M = assemble_structural(b).M_ee
        ref = oracles.mass_trapezoid(n, PROPS.nu, b.omega2[n], PROPS.rho, PROPS.h, PROPS.r, points=200_001)
        assert M[n, n] == pytest.approx(ref, rel=1e-9)

    def test_frozen_diagonals(self):
        S = assemble_structural(ModalBasis(PROPS))
        np.testing.assert_allclose(np.diag(S.M_ee), [5279.72659629, 3015.92894745, 22670.78589419, 535234.06177392],
                                   rtol=1e-9)
        np.testing.assert_allclose(np.diag(S.K_ee), [838051.84068113, 239359.44027351, 731734.33071585,
                                                     53908655.61234605], rtol=1e-9)

    def test_damping_is_proportional(self):
        S = assemble_structural(ModalBasis(props(alpha_d=0.3, beta_d=0.01)))
        assert np.array_equal(S.D_ee, 0.3 * S.M_ee + 0.01 * S.K_ee)

    def test_zero_damping(self):
        S = assemble_structural(ModalBasis(props(alpha_d=0.0, beta_d=0.0)))
        assert not np.any(S.D_ee)

    def test_quadrature_doubling(self):
        b = ModalBasis(PROPS)
        a, c = assemble_structural(b), assemble_structural(b, 2 * (4 * b.N + 8))
        for X, Y in ((a.M_ee, c.M_ee), (a.K_ee, c.K_ee)):
            assert np.abs(X - Y).max() < 1e-10 * np.abs(X).max()

    def test_quadrature_order_floor(self):
        with pytest.raises(ShellModelError):
            assemble_structural(ModalBasis(PROPS), quad_order=5)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.1, 10.0))
    def test_amplitude_covariance(self, s):
        b = ModalBasis(PROPS)
        S1, S2 = assemble_structural(b), assemble_structural(b.with_norm(s))
        np.testing.assert_allclose(S2.M_ee, s**2 * S1.M_ee, rtol=1e-12, atol=1e-12 * s**2 * np.abs(S1.M_ee).max())
        np.testing.assert_allclose(S2.K_ee, s**2 * S1.K_ee, rtol=1e-12, atol=1e-12 * s**2 * np.abs(S1.K_ee).max())
