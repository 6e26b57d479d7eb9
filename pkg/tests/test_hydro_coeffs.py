import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from vsbwec import hydro_coeffs as hc
from vsbwec.hydro_coeffs import (
    GeneralizedCoefficients,
    HydroError,
    HydroGeometry,
    PressureFileError,
    PressureSet,
    SurrogateProvider,
    TabulatedProvider,
    coefficients_on_grid,
    excitation_coeff,
    fk_pressure,
    hydrostatic_matrix,
    interpolate,
    radiation_matrices,
    read_pressure_file,
    retardation_kernel,
    reynolds_average,
    surrogate_pressures,
    write_pressure_file,
)
from vsbwec.panel_geometry import mesh_sphere
from vsbwec.presets import SHELL_DEFAULTS
from vsbwec.shell_modal import ModalBasis, ShellProperties

R = 2.0
RHO_G = 1000.0 * 9.81
BASIS = ModalBasis(ShellProperties(**{**SHELL_DEFAULTS, "h": 0.1}))


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return np.abs(a - b).max() / max(np.abs(b).max(), 1e-300)


def one_panel_geom(area=1.0, cos_psi=1.0, extra=()):
    b = np.array([[cos_psi, *extra]])
    return HydroGeometry(area=np.array([area]), b=b, rows=np.ones((1, b.shape[1])),
                         z_body=np.array([-1.0]), x_body=np.zeros(1), wet=np.ones(1, bool))


@pytest.fixture(scope="module")
def small():
    mesh = mesh_sphere(R, 16, 16)
    return mesh, HydroGeometry.from_mesh(mesh, BASIS)


class TestExcitation:
    def test_single_panel(self):
        assert np.allclose(np.abs(excitation_coeff(one_panel_geom(), [1.0 + 0j])), [1.0])

    def test_cancellation(self):
        g = HydroGeometry(area=np.ones(2), b=np.array([[1.0], [-1.0]]), rows=np.ones((2, 1)),
                          z_body=-np.ones(2), x_body=np.zeros(2), wet=np.ones(2, bool))
        assert excitation_coeff(g, [2.0, 2.0])[0] == 0

    def test_panel_count_mismatch(self, small):
        with pytest.raises(HydroError, match="panel count mismatch"):
            excitation_coeff(small[1], np.ones(7))

    def test_brute_force_32(self):
        mesh = mesh_sphere(R, 32, 32)
        g = HydroGeometry.from_mesh(mesh, BASIS)
        p = fk_pressure(g, 1.57)
        ref = oracles.brute_vector(mesh, oracles.modes_of(BASIS), p, g.wet)
        assert rel_err(excitation_coeff(g, p), -np.array(ref)) < 1e-12

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_linearity(self, seed):
        mesh = mesh_sphere(R, 8, 8)
        g = HydroGeometry.from_mesh(mesh, BASIS)
        rng = np.random.default_rng(seed)
        p1 = rng.normal(size=64) + 1j * rng.normal(size=64)
        p2 = rng.normal(size=64) + 1j * rng.normal(size=64)
        lhs = excitation_coeff(g, p1 + p2)
        rhs = excitation_coeff(g, p1) + excitation_coeff(g, p2)
        assert np.abs(lhs - rhs).max() < 1e-12 * max(1.0, np.abs(lhs).max())

    def test_positive_under_crest(self):
        g = HydroGeometry.from_mesh(mesh_sphere(R, 32, 32), None)
        Ex = excitation_coeff(g, fk_pressure(g, 0.1))
        assert Ex[0].real > 0
        assert Ex[0].real / hydrostatic_matrix(g)[0, 0] == pytest.approx(1.0, abs=0.01)


class TestHydrostatics:
    def test_waterplane_64(self):
        g = HydroGeometry.from_mesh(mesh_sphere(R, 64, 64), None)
        K = hydrostatic_matrix(g)
        assert K.shape == (1, 1)
        assert K[0, 0] == pytest.approx(RHO_G * math.pi * R**2, rel=1e-2)
        assert K[0, 0] == pytest.approx(123325.61673982925, rel=1e-12)

    def test_first_order_convergence(self):
        target = RHO_G * math.pi * R**2
        errs = [abs(hydrostatic_matrix(HydroGeometry.from_mesh(mesh_sphere(R, n, n), None))[0, 0] - target)
                for n in (16, 32, 64)]
        assert errs[1] < 0.6 * errs[0] and errs[2] < 0.6 * errs[1]

    def test_brute_force(self, small):
        mesh, g = small
        ref = oracles.brute_matrix(mesh, oracles.modes_of(BASIS), np.full(mesh.n_panels, RHO_G), g.wet)
        assert rel_err(hydrostatic_matrix(g), -np.array(ref)) < 1e-12

    def test_rigid_mode_row_is_zero(self, small):
        K = hydrostatic_matrix(small[1])
        assert np.abs(K[2]).max() < 1e-9 * np.abs(K).max()

    def test_non_symmetric(self, small):
        K = hydrostatic_matrix(small[1])
        assert np.abs(K - K.T).max() > 1e-3 * np.abs(K).max()

    def test_empty_wet_set(self, small):
        g = small[1]
        dry = HydroGeometry(g.area, g.b, g.rows, g.z_body, g.x_body, np.zeros_like(g.wet))
        with pytest.raises(HydroError):
            hydrostatic_matrix(dry)


class TestRadiation:
    def test_single_panel(self):
        D, M = radiation_matrices(one_panel_geom(area=0.5), [2.0 + 0j], 1.0)
        assert D[0, 0] == pytest.approx(1.0) and M[0, 0] == 0.0

    def test_zero_pressure(self, small):
        D, M = radiation_matrices(small[1], np.zeros(256, complex), 1.3)
        assert not D.any() and not M.any()

    def test_zero_frequency(self, small):
        with pytest.raises(HydroError):
            radiation_matrices(small[1], np.zeros(256, complex), 0.0)

    def test_uniform_imaginary_brute_force(self, small):
        mesh, g = small
        w, c0 = 1.4, 250.0
        D, M = radiation_matrices(g, np.full(mesh.n_panels, 1j * w * c0), w)
        ref = oracles.brute_matrix(mesh, oracles.modes_of(BASIS), np.full(mesh.n_panels, c0), g.wet)
        assert rel_err(M, ref) < 1e-12
        assert not D.any()

    def test_surrogate_brute_force(self, small):
        mesh, g = small
        w = 2.2
        p = hc.radiation_surrogate(g, w, 0.1, 0.6)
        D, M = radiation_matrices(g, p, w)
        modes = oracles.modes_of(BASIS)
        assert rel_err(D, oracles.brute_matrix(mesh, modes, p.real, g.wet)) < 1e-12
        assert rel_err(M, oracles.brute_matrix(mesh, modes, p.imag / w, g.wet)) < 1e-12

    def test_surrogate_signs(self, small):
        D, M = radiation_matrices(small[1], hc.radiation_surrogate(small[1], 1.0, 0.1, 0.6), 1.0)
        assert D[0, 0] > 0 and M[0, 0] > 0


class TestFroudeKrylov:
    def test_waterline_panel(self):
        g = one_panel_geom()
        g = HydroGeometry(g.area, g.b, g.rows, np.zeros(1), np.zeros(1), g.wet)
        assert fk_pressure(g, 1.7)[0] == pytest.approx(RHO_G)

    def test_long_wave_limit(self, small):
        np.testing.assert_allclose(fk_pressure(small[1], 0.0), RHO_G)

    def test_depth_attenuation(self):
        g = one_panel_geom()
        assert abs(fk_pressure(g, 2.0)[0]) == pytest.approx(RHO_G * math.exp(-4 / 9.81), rel=1e-14)
        assert abs(fk_pressure(g, 2.0)[0]) / RHO_G == pytest.approx(0.665, abs=5e-4)

    def test_against_scalar(self, small):
        g = small[1]
        p = fk_pressure(g, 1.1)
        ref = [oracles.fk_scalar(z, x, 1.1) for z, x in zip(g.z_body, g.x_body)]
        np.testing.assert_allclose(p, ref, rtol=1e-14)

    def test_surrogate_set(self, small):
        ps = surrogate_pressures(small[1], [0.5, 1.0])
        assert ps.source == "fk_surrogate" and ps.p_ex.shape == (2, 256)
        np.testing.assert_array_equal(ps.p_ex[1], fk_pressure(small[1], 1.0))


class TestGridAndInterpolation:
    def test_coefficients_on_grid(self, small):
        mesh, g = small
        ps = surrogate_pressures(g, [0.5, 1.0, 2.0])
        sets = coefficients_on_grid(g, ps)
        assert [c.omega for c in sets] == [0.5, 1.0, 2.0]
        assert all(np.array_equal(c.K_h, sets[0].K_h) for c in sets)
        assert all(np.all(np.isfinite(c.M_inf)) and c.K_h[0, 0] > 0 for c in sets)

    def test_grid_panel_mismatch(self, small):
        ps = surrogate_pressures(HydroGeometry.from_mesh(mesh_sphere(R, 8, 8), BASIS), [1.0])
        with pytest.raises(HydroError, match="panel count"):
            coefficients_on_grid(small[1], ps)

    def test_interpolation(self):
        om = np.array([1.0, 2.0, 4.0])
        vals = np.array([[0.0], [10.0], [30.0]])
        assert interpolate(om, vals, 1.5)[0] == pytest.approx(5.0)
        assert interpolate(om, vals, 3.0)[0] == pytest.approx(20.0)
        assert interpolate(om, vals, 4.0)[0] == pytest.approx(30.0)

    @pytest.mark.parametrize("w", [0.5, 4.5])
    def test_no_extrapolation(self, w):
        with pytest.raises(HydroError, match="outside"):
            interpolate([1.0, 2.0, 4.0], np.zeros((3, 1)), w)

    def test_pressure_set_validation(self):
        with pytest.raises(HydroError, match="non-monotone"):
            PressureSet(np.array([1.0, 0.5]), np.zeros((2, 3), complex), np.zeros((2, 3), complex))


class TestKernel:
    def test_box_spectrum(self):
        W, D0 = 3.0, 5.0
        om = np.linspace(0, W, 3001)
        k = retardation_kernel(om, np.full(om.size, D0), t_max=1.0, dt=0.5)
        ref = 2 / math.pi * D0 * math.sin(W * 0.5) / 0.5
        assert k.K[1] == pytest.approx(ref, rel=1e-2)

    def test_value_at_zero(self):
        om = np.linspace(0.1, 5.0, 50)
        D = np.sin(om) ** 2
        k = retardation_kernel(om, D, t_max=1.0, dt=0.1)
        assert k.K[0] == pytest.approx(2 / math.pi * np.trapezoid(D, om), rel=1e-14)

    def test_against_scalar_transform(self):
        om = np.linspace(0.05, 8.0, 120)
        D = om * np.exp(-om)
        k = retardation_kernel(om, D, t_max=3.0, dt=0.25)
        for tau, val in zip(k.taus, k.K):
            assert val == pytest.approx(oracles.cosine_transform(list(om), list(D), tau), rel=1e-11, abs=1e-14)

    def test_aliasing_guard(self):
        with pytest.raises(HydroError, match="alias"):
            retardation_kernel(np.linspace(0.1, 20, 10), np.ones(10), t_max=2.0, dt=0.2)

    def test_matrix_entrywise(self):
        om = np.linspace(0.1, 4.0, 40)
        D = np.stack([np.array([[1.0, 2.0], [0.5, 3.0]]) * np.exp(-w) for w in om])
        k = retardation_kernel(om, D, t_max=1.0, dt=0.5)
        k00 = retardation_kernel(om, D[:, 1, 0], t_max=1.0, dt=0.5)
        np.testing.assert_allclose(k.K[:, 1, 0], k00.K, rtol=1e-14)

    def test_tail_warning(self, caplog):
        om = np.linspace(0.0, 0.5, 20)
        retardation_kernel(om, np.ones(20), t_max=0.5, dt=0.1)
        assert any("tail" in r.message for r in caplog.records)

    def test_at_interpolates(self):
        om = np.linspace(0.1, 4.0, 40)
        k = retardation_kernel(om, np.exp(-om), t_max=1.0, dt=0.1)
        assert k.at(0.15) == pytest.approx(0.5 * (k.K[1] + k.K[2]))
        assert k.at(5.0) == 0.0 and k.at(-0.1) == 0.0


class TestReynolds:
    def _c(self, s, w=1.0):
        e = np.eye(2)
        return GeneralizedCoefficients(M_inf=s * e, D_r=2 * s * e, K_h=3 * s * e, Ex=np.array([s, 1j * s]), omega=w)

    def test_constant(self):
        c = self._c(1.5)
        avg = reynolds_average([c, c, c])
        for attr in ("M_inf", "D_r", "K_h", "Ex"):
            np.testing.assert_array_equal(getattr(avg, attr), getattr(c, attr))

    def test_zero_mean_fluctuation(self):
        t = np.linspace(0.0, 2 * 2 * math.pi, 401)
        series = [self._c(4.0 + math.sin(tk)) for tk in t]
        avg = reynolds_average(series, times=t)
        np.testing.assert_allclose(avg.M_inf, 4.0 * np.eye(2), atol=1e-10)

    def test_single_snapshot_shortcut(self):
        c = self._c(2.0)
        assert reynolds_average([c]) is c

    def test_empty(self):
        with pytest.raises(HydroError):
            reynolds_average([])


class TestPressureFile:
    def _set(self, F=3, P=10, seed=0):
        rng = np.random.default_rng(seed)
        c = lambda: rng.normal(size=(F, P)) + 1j * rng.normal(size=(F, P))
        return PressureSet(np.sort(rng.uniform(0.1, 3, F)), c() * 1e3, c() * 1e2)

    def test_round_trip(self, tmp_path):
        ps = self._set()
        path = tmp_path / "p.txt"
        write_pressure_file(ps, path)
        back = read_pressure_file(path)
        assert np.array_equal(back.omegas, ps.omegas)
        assert np.array_equal(back.p_ex, ps.p_ex) and np.array_equal(back.p_rd, ps.p_rd)
        assert path.read_text().splitlines()[:2] == ["VSBPRES v1", "nfreq 3 npanels 10"]

    def test_non_monotone(self, tmp_path):
        path = tmp_path / "p.txt"
        write_pressure_file(self._set(), path)
        lines = path.read_text().splitlines()
        omega_lines = [i for i, ln in enumerate(lines) if ln.startswith("omega")]
        lines[omega_lines[0]], lines[omega_lines[1]] = lines[omega_lines[1]], lines[omega_lines[0]]
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(PressureFileError, match="non-monotone frequency grid") as ei:
            read_pressure_file(path)
        assert ei.value.code == "non_monotone"

    def test_panel_count(self, tmp_path):
        path = tmp_path / "p.txt"
        write_pressure_file(self._set(), path)
        with pytest.raises(PressureFileError, match="panel count mismatch") as ei:
            read_pressure_file(path, n_panels=12)
        assert ei.value.code == "panel_count_mismatch"

    def test_header(self, tmp_path):
        path = tmp_path / "p.txt"
        path.write_text("VSBPRES v2\nnfreq 1 npanels 1\n")
        with pytest.raises(PressureFileError) as ei:
            read_pressure_file(path)
        assert ei.value.code == "malformed_header"

    def test_frequency_count(self, tmp_path):
        path = tmp_path / "p.txt"
        write_pressure_file(self._set(), path)
        text = path.read_text().replace("nfreq 3", "nfreq 4")
        path.write_text(text)
        with pytest.raises(PressureFileError) as ei:
            read_pressure_file(path)
        assert ei.value.code == "frequency_count_mismatch"

    def test_error_codes_distinct(self):
        assert len({"malformed_header", "panel_count_mismatch", "frequency_count_mismatch", "non_monotone"}) == 4


class TestProviders:
    def test_surrogate(self, small):
        p_ex, p_rd = SurrogateProvider()(small[1], [1.0, 2.0])
        assert p_ex.shape == p_rd.shape == (2, 256)
        assert "kappa_d=0.1" in SurrogateProvider().describe()

    def test_surrogate_rejects_negative(self):
        with pytest.raises(HydroError):
            SurrogateProvider(kappa_d=-1)

    def test_tabulated_interpolates(self, small):
        g = small[1]
        ps = surrogate_pressures(g, [1.0, 2.0])
        p_ex, _ = TabulatedProvider(ps)(g, [1.5])
        np.testing.assert_allclose(p_ex[0], 0.5 * (ps.p_ex[0] + ps.p_ex[1]))
        with pytest.raises(HydroError):
            TabulatedProvider(ps)(g, [2.5])

    def test_tabulated_panel_check(self, small):
        ps = surrogate_pressures(HydroGeometry.from_mesh(mesh_sphere(R, 8, 8), None), [1.0])
        with pytest.raises(HydroError, match="panel count"):
            TabulatedProvider(ps)(small[1], [1.0])
