"""Cummins-equation solver for a rigid heaving buoy, used as a reference.

    (m + mu) z'' = f_e(t) - K_s z - f_r(t) - c z'

The radiation force ``f_r`` is one of

* ``"damping"``: ``B(omega) z'`` at the single frequency of a regular wave,
* ``"convolution"``: ``int h_r(t - tau) z'(tau) d tau`` by the trapezoid rule,
* ``"ss"``: a fitted linear state-space model ``x_r' = A x_r + B z'``, ``f_r = C x_r``.

Everything here is scalar and written independently of the flexible engine.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, logm

from .hydro_coeffs import (
    HydroGeometry,
    excitation_coeff,
    hydrostatic_matrix,
    radiation_matrices,
    retardation_kernel,
)
from .integrator import IntegrationError, step_interval
from .panel_geometry import mesh_sphere
from .wave_field import IrregularWave, RegularWave


class OracleError(RuntimeError):
    """Bad oracle input or a failed fit."""


@dataclass(frozen=True)
class RigidCoefficients:
    """Scalar heave coefficients.

    ``fe`` holds one complex excitation coefficient per wave component.
    ``omegas``/``B`` is the damping curve behind the kernel samples
    ``taus``/``h_r`` (absent for regular-wave damping runs).
    """

    m: float
    mu: float
    K_s: float
    fe: np.ndarray
    B_wave: float = 0.0
    omegas: np.ndarray = None
    B: np.ndarray = None
    taus: np.ndarray = None
    h_r: np.ndarray = None

    def __post_init__(self):
        if not (self.m > 0 and self.K_s > 0):
            raise OracleError("need m > 0 and K_s > 0")
        if self.B is not None and np.any(self.B < -1e-9 * max(1.0, np.abs(self.B).max())):
            raise OracleError("radiation damping curve must be non-negative")

    @classmethod
    def from_config(cls, config):
        """Heave coefficients of the undeformed sphere for a run configuration."""
        mesh = mesh_sphere(config.r, config.n_phi, config.n_theta)
        geom = HydroGeometry.from_mesh(mesh, None)
        prov, wave = config.provider, config.wave
        K_s = float(hydrostatic_matrix(geom, config.rho_w, config.g)[0, 0])
        if wave is None:
            return cls(m=config.mass, mu=0.0, K_s=K_s, fe=np.zeros(1, dtype=complex))
        p_ex, _ = prov(geom, wave.omegas)
        fe = np.array([excitation_coeff(geom, p)[0] for p in p_ex])
        if isinstance(wave, RegularWave):
            _, p_rd = prov(geom, [wave.omega])
            D, M = radiation_matrices(geom, p_rd[0], wave.omega)
            return cls(m=config.mass, mu=float(M[0, 0]), K_s=K_s, fe=fe, B_wave=float(D[0, 0]))
        w_top = config.added_mass_frequency
        _, p_top = prov(geom, [w_top])
        mu = float(radiation_matrices(geom, p_top[0], w_top)[1][0, 0])
        lo, hi, nk = config.kernel_omega
        omegas = np.linspace(lo, hi, int(nk))
        _, p_rd = prov(geom, omegas)
        B = np.array([radiation_matrices(geom, p, w)[0][0, 0] for p, w in zip(p_rd, omegas)])
        kern = retardation_kernel(omegas, B, config.kernel_t_max, config.dt_max)
        return cls(m=config.mass, mu=mu, K_s=K_s, fe=fe, omegas=omegas, B=B,
                   taus=kern.taus, h_r=kern.K)


@dataclass(frozen=True)
class RadiationSS:
    """State-space radiation model ``x' = A x + B u``, ``f = C x``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        eig = np.linalg.eigvals(self.A)
        if np.any(eig.real >= 0):
            raise OracleError(f"state-space radiation model is not stable (eigenvalues {eig})")

    @property
    def order(self):
        return self.A.shape[0]

    def impulse(self, t):
        t = np.atleast_1d(t)
        return np.array([self.C @ expm(self.A * tk) @ self.B for tk in t])


def fit_radiation_ss(taus, h_r, order=4, stride=2):
    """Realize ``h_r(t) ~ C exp(A t) B`` from kernel samples.

    Eigensystem realization on a Hankel matrix of every ``stride``-th sample
    fixes ``A`` and ``B``; ``C`` is then refitted by linear least squares
    against all samples.
    """
    taus = np.asarray(taus, dtype=float)
    h = np.asarray(h_r, dtype=float)
    dt = (taus[1] - taus[0]) * stride
    hs = h[::stride]
    p = (hs.size - 1) // 2
    if p < order:
        raise OracleError("kernel too short for the requested order")
    H0 = np.array([hs[i:i + p] for i in range(p)])
    H1 = np.array([hs[i + 1:i + 1 + p] for i in range(p)])
    U, S, Vt = np.linalg.svd(H0)
    U, S, Vt = U[:, :order], S[:order], Vt[:order]
    Sr = np.sqrt(S)
    Ad = (U.T @ H1 @ Vt.T) / np.outer(Sr, Sr)
    B = Sr * Vt[:, 0]
    A = logm(Ad) / dt
    if np.max(np.abs(A.imag)) > 1e-8 * max(1.0, np.max(np.abs(A.real))):
        raise OracleError("realization has no real continuous-time logarithm")
    A = A.real
    basis = np.array([expm(A * t) @ B for t in taus])
    C, *_ = np.linalg.lstsq(basis, h, rcond=None)
    return RadiationSS(A=A, B=B, C=C)


def radiation_ss_step(ss, x_r, zdot, dt):
    """Advance the radiation states over ``dt`` with ``zdot`` held constant.

    Returns
    -------
    x_next, f_r : ndarray, float
        New states and the force ``C x_next``.
    """
    Ad = expm(ss.A * dt)
    Bd = np.linalg.solve(ss.A, (Ad - np.eye(ss.order)) @ ss.B)
    x_next = Ad @ x_r + Bd * zdot
    return x_next, float(ss.C @ x_next)


def cummins_rhs(z, zdot, t, coeffs, wave, c_pto, f_rad=None):
    """Heave acceleration of the Cummins equation.

    ``f_rad`` is the radiation force to subtract; when omitted the damping
    form ``B_wave * zdot`` is used.
    """
    f_e = 0.0
    if wave is not None:
        f_e = float(np.real(np.sum(coeffs.fe * wave.amps * np.exp(1j * (wave.omegas * t + wave.phases)))))
    if f_rad is None:
        f_rad = coeffs.B_wave * zdot
    return (f_e - coeffs.K_s * z - f_rad - c_pto * zdot) / (coeffs.m + coeffs.mu)


@dataclass
class RigidTrajectory:
    t: np.ndarray
    z: np.ndarray
    zdot: np.ndarray
    power: np.ndarray
    energy: np.ndarray
    meta: dict

    @property
    def q_pto(self):
        return -self.meta.get("pto_c", 0.0) * self.zdot


def simulate(coeffs, wave, c_pto, t_end, dt=0.05, radiation="damping", atol=1e-8, rtol=1e-6,
             ss_order=4, z0=0.0, v0=0.0):
    """Integrate the Cummins equation on the output grid ``k * dt``."""
    if radiation not in ("damping", "convolution", "ss"):
        raise OracleError(f"unknown radiation form {radiation!r}")
    n_steps = int(round(t_end / dt))
    T = np.arange(n_steps + 1) * dt
    Z = np.zeros(n_steps + 1)
    V = np.zeros(n_steps + 1)
    Z[0], V[0] = z0, v0

    if radiation == "damping":
        y = np.array([z0, v0])

        def make_f(k):
            return lambda t, y: np.array([y[1], cummins_rhs(y[0], y[1], t, coeffs, wave, c_pto)])
    elif radiation == "convolution":
        if coeffs.h_r is None:
            raise OracleError("convolution radiation needs kernel samples")
        if abs((coeffs.taus[1] - coeffs.taus[0]) - dt) > 1e-12:
            raise OracleError("kernel step differs from the output step")
        h = coeffs.h_r
        L = h.size
        y = np.array([z0, v0])

        def make_f(k):
            # trapezoid over the stored samples; the last segment reaches the current time
            if k == 0:
                s0 = s1 = 0.0
            else:
                j = np.arange(max(0, k - L + 1), k + 1)
                w = np.where((j == 0) | (j == k), 0.5, 1.0)
                s0 = float(np.sum(w * h[k - j] * V[j]))
                j1 = j[k - j + 1 < L]
                w1 = np.where((j1 == 0) | (j1 == k), 0.5, 1.0)
                s1 = float(np.sum(w1 * h[k - j1 + 1] * V[j1]))
            t0, vk = T[k], V[k]

            def f(t, y):
                s = (t - t0) / dt
                conv = dt * ((1 - s) * s0 + s * s1)
                conv += 0.5 * s * dt * (((1 - s) * h[0] + s * h[1]) * vk + h[0] * y[1])
                return np.array([y[1], cummins_rhs(y[0], y[1], t, coeffs, wave, c_pto, conv)])
            return f
    else:
        if coeffs.h_r is None:
            raise OracleError("state-space radiation needs kernel samples")
        ss = fit_radiation_ss(coeffs.taus, coeffs.h_r, ss_order)
        y = np.concatenate([[z0, v0], np.zeros(ss.order)])

        def make_f(k):
            def f(t, y):
                xr = y[2:]
                acc = cummins_rhs(y[0], y[1], t, coeffs, wave, c_pto, float(ss.C @ xr))
                return np.concatenate([[y[1], acc], ss.A @ xr + ss.B * y[1]])
            return f

    hstep = dt
    for k in range(n_steps):
        try:
            y, hstep, _ = step_interval(make_f(k), T[k], y, T[k + 1], hstep, atol, rtol)
        except IntegrationError as exc:
            raise OracleError(str(exc)) from exc
        Z[k + 1], V[k + 1] = y[0], y[1]
    power = c_pto * V**2
    energy = np.concatenate([[0.0], np.cumsum(0.5 * dt * (power[1:] + power[:-1]))])
    meta = {"mode": "rigid_oracle", "radiation": radiation, "pto_c": c_pto}
    return RigidTrajectory(t=T, z=Z, zdot=V, power=power, energy=energy, meta=meta)


def simulate_config(config, radiation=None):
    """Oracle run for a :class:`SimConfig`, returned as an engine ``Trajectory``."""
    from .dynamics_engine import Trajectory, run_metadata

    coeffs = RigidCoefficients.from_config(config)
    if radiation is None:
        radiation = "convolution" if isinstance(config.wave, IrregularWave) else "damping"
    rt = simulate(coeffs, config.wave, config.pto_c, config.t_end, config.dt_max, radiation,
                  config.atol, config.rtol)
    meta = run_metadata(config, refresh_count=1, radiation=radiation, n_modes=0)
    return Trajectory(t=rt.t, x=rt.z[:, None], v=rt.zdot[:, None], q_pto=-config.pto_c * rt.zdot,
                      power=rt.power, energy=rt.energy, meta=meta)


def compare(traj_a, traj_b, transient=0.0):
    """Displacement RMS error (% of pk-pk of ``traj_a``) and energy error (%).

    ``traj_b`` is linearly resampled onto the time grid of ``traj_a`` when the
    grids differ; energy is the final harvested energy of each run.
    """
    ta, tb = np.asarray(traj_a.t), np.asarray(traj_b.t)
    za, zb = _heave(traj_a), _heave(traj_b)
    if ta.shape != tb.shape or not np.allclose(ta, tb, rtol=0, atol=1e-9):
        if tb[0] > ta[0] + 1e-9 or tb[-1] < ta[-1] - 1e-9:
            raise OracleError("trajectories do not share a common time window")
        zb = np.interp(ta, tb, zb)
    window = ta >= transient
    if not np.any(window):
        raise OracleError("empty comparison window")
    pk = np.ptp(za[window])
    rms = np.sqrt(np.mean((zb[window] - za[window]) ** 2))
    ea, eb = float(traj_a.energy[-1]), float(traj_b.energy[-1])
    return {
        "rms_pct": 100.0 * rms / pk if pk > 0 else (0.0 if rms == 0 else np.inf),
        "energy_pct": 100.0 * (eb - ea) / ea if ea != 0 else (0.0 if eb == 0 else np.inf),
    }


def _heave(traj):
    z = np.asarray(traj.z)
    return z[:, 0] if z.ndim == 2 else z
