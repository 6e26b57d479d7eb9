"""Equations of motion of the flexible heaving buoy and their time integration.

State ``x = [z, eta_1 .. eta_N]`` (heave of the shell centre, then modal
amplitudes). The coupled system is

    (M + M_inf) x'' + D~ x' + (K + K_h) x = Q_ext + Q_pto [+ Q_rad]

with ``M = diag(m, M_ee)``, ``K = diag(0, K_ee)`` and ``D = diag(D_x, D_ee)``.
Regular waves use ``D~ = D + D_r(omega)``; irregular waves use ``D~ = D``
with the radiation memory convolution ``Q_rad``. Heave-only motion is
enforced by construction (no surge, sway or rotation rows), so no
constraint force appears.

Two FSI schemes are offered. ``one_way`` keeps the coefficients of the
undeformed shell for the whole run (the mean of the coefficient series of
a shape that never moves). ``two_way`` rebuilds every coefficient from the
instantaneous deformed shell each ``fsi_interval`` and holds it constant
in between.
"""
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .hydro_coeffs import (
    HydroGeometry,
    SurrogateProvider,
    excitation_coeff,
    hydrostatic_matrix,
    radiation_matrices,
    retardation_kernel,
    RHO_W,
    G,
)
from .integrator import IntegrationError, step_interval
from .panel_geometry import LinearRegimeError, mesh_sphere
from .shell_modal import ModalBasis, ShellProperties, assemble_structural
from .wave_field import IrregularWave, RegularWave

LOG = logging.getLogger(__name__)

FSI_MODES = ("one_way", "two_way", "rigid_oracle")


class SimulationError(RuntimeError):
    """Numerical failure of a run; ``t`` is the simulation time when it happened."""

    def __init__(self, message, t=None):
        super().__init__(message if t is None else f"{message} (t = {t:.6g} s)")
        self.t = t


class ConfigError(ValueError):
    """Inconsistent simulation configuration."""


@dataclass(frozen=True)
class SimConfig:
    """Everything one run needs.

    ``shell=None`` gives the rigid buoy (no modal coordinates) of radius
    ``radius``. ``buoy_mass=None`` uses the displaced mass of the
    half-submerged sphere so that weight and buoyancy balance at ``z = 0``.
    """

    shell: ShellProperties | None
    wave: RegularWave | IrregularWave | None
    t_end: float = 300.0
    pto_c: float = 8000.0
    fsi_mode: str = "one_way"
    fsi_interval: float = 0.05
    dt_max: float = 0.05
    atol: float = 1e-8
    rtol: float = 1e-6
    n_phi: int = 32
    n_theta: int = 32
    radius: float = 2.0
    buoy_mass: float | None = None
    D_x: float = 0.0
    A_norm: float = 1.0
    shell_form: str = "thin_shell"
    provider: object = field(default_factory=SurrogateProvider, compare=False)
    kernel_omega: tuple = (0.05, 20.0, 400)
    kernel_t_max: float = 20.0
    added_mass_omega: float | None = None
    transient: float = 10.0
    x0: tuple | None = None
    v0: tuple | None = None
    rho_w: float = RHO_W
    g: float = G

    def __post_init__(self):
        if self.fsi_mode not in FSI_MODES:
            raise ConfigError(f"fsi_mode must be one of {FSI_MODES}")
        if not self.t_end > 0:
            raise ConfigError("t_end must be positive")
        if not self.dt_max > 0:
            raise ConfigError("dt_max must be positive")
        if self.fsi_interval < self.dt_max - 1e-12:
            raise ConfigError("fsi_interval must be at least dt_max")
        ratio = self.fsi_interval / self.dt_max
        if abs(ratio - round(ratio)) > 1e-9:
            raise ConfigError("fsi_interval must be a whole multiple of dt_max")
        steps = self.t_end / self.dt_max
        if abs(steps - round(steps)) > 1e-9:
            raise ConfigError("t_end must be a whole multiple of dt_max")
        if self.pto_c < 0:
            raise ConfigError("PTO damping must be non-negative")
        if self.buoy_mass is not None and not self.buoy_mass > 0:
            raise ConfigError("buoy mass must be positive")
        if self.added_mass_omega is not None and not self.added_mass_omega > 0:
            raise ConfigError("added_mass_omega must be positive")

    @property
    def r(self):
        return self.shell.r if self.shell is not None else self.radius

    @property
    def n_modes(self):
        return 0 if self.shell is None else int(self.shell.N)

    @property
    def mass(self):
        if self.buoy_mass is not None:
            return self.buoy_mass
        return self.rho_w * 2.0 / 3.0 * np.pi * self.r**3

    @property
    def added_mass_frequency(self):
        """Frequency of the added mass used with irregular waves (rad/s)."""
        if self.added_mass_omega is not None:
            return float(self.added_mass_omega)
        return float(self.wave.omega_max)

    def fingerprint(self):
        """Canonical JSON description used for the config hash."""
        wave = self.wave
        if isinstance(wave, RegularWave):
            wdesc = {"kind": "regular", "H": wave.H, "omega": wave.omega}
        elif isinstance(wave, IrregularWave):
            wdesc = {"kind": "irregular", "Hs": wave.Hs, "Tp": wave.Tp, "n_freq": wave.n_freq,
                     "band": list(wave.band), "seed": wave.seed}
        else:
            wdesc = None
        shell = None if self.shell is None else {
            k: getattr(self.shell, k) for k in ("r", "h", "E", "nu", "rho", "N", "alpha_d", "beta_d")
        }
        desc = {
            "shell": shell, "wave": wdesc, "provider": self.provider.describe(),
            **{k: getattr(self, k) for k in (
                "t_end", "pto_c", "fsi_mode", "fsi_interval", "dt_max", "atol", "rtol", "n_phi",
                "n_theta", "radius", "buoy_mass", "D_x", "A_norm", "shell_form", "kernel_t_max",
                "added_mass_omega", "transient",
                "x0", "v0", "rho_w", "g")},
            "kernel_omega": list(self.kernel_omega),
        }
        return json.dumps(desc, sort_keys=True, default=repr)

    def config_hash(self):
        return hashlib.sha256(self.fingerprint().encode()).hexdigest()[:16]


@dataclass
class SimState:
    """Instantaneous generalized state of the buoy."""

    x: np.ndarray
    v: np.ndarray
    t: float = 0.0
    energy: float = 0.0
    v_hist: list = field(default_factory=list)

    def check(self, r):
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.v))):
            raise SimulationError("non-finite state", self.t)
        if abs(self.x[0]) >= r:
            raise LinearRegimeError(f"|heave| = {abs(self.x[0]):.4g} m reached the radius "
                                    f"{r:.4g} m at t = {self.t:.6g} s")


@dataclass
class Trajectory:
    """Output-grid time series of a run."""

    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    q_pto: np.ndarray
    power: np.ndarray
    energy: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def z(self):
        return self.x[:, 0]

    @property
    def zdot(self):
        return self.v[:, 0]

    @property
    def eta(self):
        return self.x[:, 1:]

    @property
    def n_modes(self):
        return self.x.shape[1] - 1

    def columns(self):
        names = ["t", "z", "zdot"] + [f"eta_{k + 1}" for k in range(self.n_modes)]
        return names + ["Q_pto", "power", "energy"]

    def to_csv(self, path):
        """Write the trajectory with a ``#`` metadata header; floats use ``repr``."""
        with open(path, "w") as fh:
            for key in sorted(self.meta):
                fh.write(f"# {key} = {self.meta[key]}\n")
            fh.write(",".join(self.columns()) + "\n")
            data = np.column_stack([self.t, self.z, self.zdot, self.eta, self.q_pto, self.power, self.energy])
            for row in data:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_trajectory_csv(path):
    """Read back a trajectory CSV as ``(meta, columns, data)``."""
    meta, header, rows = {}, None, []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, val = line[1:].partition("=")
                meta[key.strip()] = val.strip()
            elif header is None:
                header = line.split(",")
            elif line:
                rows.append([float(v) for v in line.split(",")])
    return meta, header, np.array(rows)


def pto_force(v_heave, c, n=1):
    """Generalized PTO force ``[-c v_heave, 0, ..., 0]`` of length ``n``."""
    if c < 0:
        raise ConfigError("PTO damping must be non-negative")
    q = np.zeros(n)
    q[0] = -c * v_heave
    return q


@dataclass
class VelocityHistory:
    """Past generalized velocities sampled every ``dt`` from ``t0``."""

    dt: float
    samples: list = field(default_factory=list)
    t0: float = 0.0

    def append(self, v):
        self.samples.append(np.asarray(v, dtype=float).copy())

    def array(self):
        return np.array(self.samples)


def radiation_force_conv(kernel, v_hist, t, v_now=None):
    """Radiation memory force ``-int K(t - tau) x'(tau) d tau``.

    Without ``v_now`` this is the rectangle sum ``-sum_j K(t - tau_j) v_j dtau``
    over the stored samples. With ``v_now`` (the velocity at ``t``) the
    integral is taken by the trapezoid rule over the samples plus the
    partial segment from the last sample to ``t``; this is the form used by
    the integrator.
    """
    if abs(kernel.dt - v_hist.dt) > 1e-12 * max(1.0, kernel.dt):
        raise SimulationError(f"kernel step {kernel.dt} differs from history step {v_hist.dt}")
    V = v_hist.array()
    n = kernel.K.shape[1]
    if V.size == 0:
        return np.zeros(n)
    taus = v_hist.t0 + np.arange(len(V)) * v_hist.dt
    lags = t - taus
    Ks = np.array([kernel.at(lag) for lag in lags])
    dt = v_hist.dt
    if v_now is None:
        return -dt * np.einsum("lij,lj->i", Ks, V)
    w = np.ones(len(V))
    w[0] = 0.5
    w[-1] = 0.5 if len(V) > 1 else 0.0
    conv = dt * np.einsum("l,lij,lj->i", w, Ks, V)
    part = lags[-1]
    conv += 0.5 * part * (Ks[-1] @ V[-1] + kernel.K[0] @ np.asarray(v_now))
    return -conv


class _Convolution:
    """Incremental form of the trapezoid convolution of :func:`radiation_force_conv`.

    At each output instant ``t_k`` the history sums against the kernel
    samples ``K[k-j]`` and ``K[k-j+1]`` are formed once; inside the interval
    the force is then linear in the interpolation weight plus a term in the
    current velocity.
    """

    def __init__(self, kernel, n_steps, n):
        self.kernel = kernel
        self.dt = kernel.dt
        self.V = np.zeros((n_steps + 1, n))
        self.k = -1
        self.S0 = np.zeros(n)
        self.S1 = np.zeros(n)

    def set_kernel(self, kernel):
        self.kernel = kernel

    def push(self, v):
        """Store the velocity of output instant ``k + 1`` and rebuild the history sums."""
        self.k += 1
        k = self.k
        self.V[k] = v
        K = self.kernel.K
        L = K.shape[0]
        if k == 0:
            self.S0[:] = 0.0
            self.S1[:] = 0.0
            return
        w = np.ones(k + 1)
        w[0] = w[-1] = 0.5
        j0 = max(0, k - L + 1)
        lag0 = k - np.arange(j0, k + 1)
        self.S0 = np.einsum("l,lij,lj->i", w[j0:], K[lag0], self.V[j0:k + 1])
        j1 = max(0, k - L + 2)
        lag1 = k - np.arange(j1, k + 1) + 1
        self.S1 = np.einsum("l,lij,lj->i", w[j1:], K[lag1], self.V[j1:k + 1])

    def force(self, s, v_now):
        """``Q_rad`` at fraction ``s`` of the current interval."""
        K = self.kernel.K
        dt = self.dt
        conv = dt * ((1.0 - s) * self.S0 + s * self.S1)
        K_part = (1.0 - s) * K[0] + s * K[1]
        conv += 0.5 * s * dt * (K_part @ self.V[self.k] + K[0] @ v_now)
        return -conv


@dataclass
class Coefficients:
    """Coefficient snapshot used between refreshes."""

    M_inf: np.ndarray
    D_r: np.ndarray
    K_h: np.ndarray
    Ex: np.ndarray
    kernel: object = None
    D_grid: np.ndarray = None


class Model:
    """Static parts of the system: mesh, basis, structural matrices."""

    def __init__(self, config):
        self.config = config
        self.mesh = mesh_sphere(config.r, config.n_phi, config.n_theta)
        if config.shell is not None:
            self.basis = ModalBasis(config.shell, config.A_norm, config.shell_form)
            self.structural = assemble_structural(self.basis)
        else:
            self.basis = None
            self.structural = None
        n = config.n_modes + 1
        self.n = n
        M = np.zeros((n, n))
        K = np.zeros((n, n))
        D = np.zeros((n, n))
        M[0, 0] = config.mass
        D[0, 0] = config.D_x
        if self.structural is not None:
            M[1:, 1:] = self.structural.M_ee
            K[1:, 1:] = self.structural.K_ee
            D[1:, 1:] = self.structural.D_ee
        self.M, self.K, self.D = M, K, D
        lo, hi, nk = config.kernel_omega
        self.kernel_omegas = np.linspace(lo, hi, int(nk))

    def geometry(self, eta=None):
        geom = HydroGeometry.from_mesh(self.mesh, self.basis, eta=eta)
        n_wet = int(geom.wet.sum())
        if n_wet == 0 or n_wet == geom.n_panels:
            raise LinearRegimeError("deformed shell is fully dry or fully wet")
        return geom

    def coefficients(self, geom):
        """Assemble the coefficient snapshot of one geometry for the configured wave."""
        cfg = self.config
        wave = cfg.wave
        prov = cfg.provider
        K_h = hydrostatic_matrix(geom, cfg.rho_w, cfg.g)
        if wave is None:
            zero = np.zeros((self.n, self.n))
            return Coefficients(M_inf=zero, D_r=zero, K_h=K_h, Ex=np.zeros((self.n, 1), dtype=complex))
        if isinstance(wave, RegularWave):
            p_ex, p_rd = prov(geom, [wave.omega])
            D_r, M_inf = radiation_matrices(geom, p_rd[0], wave.omega)
            Ex = excitation_coeff(geom, p_ex[0])[:, None]
            return Coefficients(M_inf=M_inf, D_r=D_r, K_h=K_h, Ex=Ex)
        # irregular: added mass at the largest wave frequency (unless overridden),
        # memory kernel from D_r(omega)
        p_ex, _ = prov(geom, wave.omegas)
        Ex = np.array([excitation_coeff(geom, p) for p in p_ex]).T
        w_top = cfg.added_mass_frequency
        _, p_top = prov(geom, [w_top])
        _, M_inf = radiation_matrices(geom, p_top[0], w_top)
        _, p_rd = prov(geom, self.kernel_omegas)
        D_grid = np.array([radiation_matrices(geom, p, w)[0] for p, w in zip(p_rd, self.kernel_omegas)])
        kernel = retardation_kernel(self.kernel_omegas, D_grid, cfg.kernel_t_max, cfg.dt_max)
        return Coefficients(M_inf=M_inf, D_r=np.zeros((self.n, self.n)), K_h=K_h, Ex=Ex,
                            kernel=kernel, D_grid=D_grid)


def _system(model, coeffs, irregular):
    """Return (Minv, G) with acceleration = Minv @ forcing - G @ [x; v]."""
    cfg = model.config
    M_t = model.M + coeffs.M_inf
    D_t = model.D.copy() if irregular else model.D + coeffs.D_r
    D_t[0, 0] += cfg.pto_c
    K_t = model.K + coeffs.K_h
    try:
        lu = np.linalg.solve(M_t, np.eye(model.n))
    except np.linalg.LinAlgError as exc:
        raise SimulationError("singular generalized mass matrix M + M_inf") from exc
    if not np.all(np.isfinite(lu)) or np.linalg.cond(M_t) > 1e14:
        raise SimulationError("singular generalized mass matrix M + M_inf")
    return lu, np.hstack([lu @ K_t, lu @ D_t])


def eom_rhs(state, coeffs, wave, config, model=None, q_rad=None):
    """Generalized accelerations for one state (reference, unoptimized form).

    Parameters
    ----------
    state : SimState
    coeffs : Coefficients
    wave : RegularWave, IrregularWave or None
    config : SimConfig
    q_rad : ndarray, optional
        Radiation memory force for irregular waves.
    """
    model = model or Model(config)
    irregular = isinstance(wave, IrregularWave)
    M_t = model.M + coeffs.M_inf
    D_t = model.D if irregular else model.D + coeffs.D_r
    K_t = model.K + coeffs.K_h
    if not (np.all(np.isfinite(state.x)) and np.all(np.isfinite(state.v))):
        raise SimulationError("non-finite state", state.t)
    q = pto_force(state.v[0], config.pto_c, model.n)
    if wave is not None:
        phasor = wave.amps * np.exp(1j * (wave.omegas * state.t + wave.phases))
        q = q + (coeffs.Ex @ phasor).real
    if q_rad is not None:
        q = q + q_rad
    rhs = q - D_t @ state.v - K_t @ state.x
    try:
        return np.linalg.solve(M_t, rhs)
    except np.linalg.LinAlgError as exc:
        raise SimulationError("singular generalized mass matrix M + M_inf", state.t) from exc


def integrate(config, record_coefficients=False):
    """Run one simulation and return its :class:`Trajectory`.

    The adaptive Dormand-Prince stepper lands on every output instant
    ``k * dt_max``; within an output interval the right-hand side is smooth
    (coefficients frozen, convolution history fixed). Two-way refreshes fall
    on output instants and restart the stepper.
    """
    if config.fsi_mode == "rigid_oracle":
        from .rigid_oracle import simulate_config
        return simulate_config(config)
    model = Model(config)
    n = model.n
    wave = config.wave
    irregular = isinstance(wave, IrregularWave)
    dt = config.dt_max
    n_steps = int(round(config.t_end / dt))
    refresh_every = int(round(config.fsi_interval / dt))
    two_way = config.fsi_mode == "two_way" and model.basis is not None

    x = np.zeros(n) if config.x0 is None else np.array(config.x0, dtype=float)
    v = np.zeros(n) if config.v0 is None else np.array(config.v0, dtype=float)
    if x.size != n or v.size != n:
        raise ConfigError(f"initial state must have {n} entries")
    state = SimState(x=x, v=v)
    state.check(config.r)

    coeffs = model.coefficients(model.geometry())
    refresh_count = 1
    series = [coeffs] if record_coefficients else None
    Minv, Gm = _system(model, coeffs, irregular)
    MinvEx = Minv @ coeffs.Ex
    conv = _Convolution(coeffs.kernel, n_steps, n) if irregular else None
    if wave is not None:
        amps, omegas, phases = wave.amps, wave.omegas, wave.phases
    else:
        amps = omegas = phases = np.zeros(1)

    T = np.arange(n_steps + 1) * dt
    X = np.zeros((n_steps + 1, n))
    Vv = np.zeros((n_steps + 1, n))
    X[0], Vv[0] = x, v
    y = np.concatenate([x, v])
    h = dt
    total_steps = 0

    for k in range(n_steps):
        t0 = T[k]
        if two_way and k > 0 and k % refresh_every == 0:
            coeffs = model.coefficients(model.geometry(y[1:n]))
            refresh_count += 1
            if record_coefficients:
                series.append(coeffs)
            Minv, Gm = _system(model, coeffs, irregular)
            MinvEx = Minv @ coeffs.Ex
            if irregular:
                conv.set_kernel(coeffs.kernel)
        if irregular:
            conv.push(y[n:])

        if irregular:
            def f(t, yy, t0=t0):
                a = (MinvEx @ (amps * np.exp(1j * (omegas * t + phases)))).real
                a += Minv @ conv.force((t - t0) / dt, yy[n:])
                a -= Gm @ yy
                return np.concatenate((yy[n:], a))
        else:
            # single component: Re(F e^{i w t}) = Fc cos(w t) - Fs sin(w t)
            Fc = (MinvEx @ (amps * np.exp(1j * phases))).real
            Fs = (MinvEx @ (amps * np.exp(1j * phases))).imag
            w0 = float(omegas[0])

            def f(t, yy, Fc=Fc, Fs=Fs):
                out = np.empty(2 * n)
                out[:n] = yy[n:]
                out[n:] = Fc * math.cos(w0 * t) - Fs * math.sin(w0 * t) - Gm @ yy
                return out

        try:
            y, h, m = step_interval(f, t0, y, T[k + 1], h, config.atol, config.rtol)
        except IntegrationError as exc:
            raise SimulationError(str(exc), exc.t) from exc
        total_steps += m
        state.x, state.v, state.t = y[:n], y[n:], T[k + 1]
        state.check(config.r)
        X[k + 1], Vv[k + 1] = y[:n], y[n:]

    zdot = Vv[:, 0]
    power = config.pto_c * zdot**2
    energy = np.concatenate([[0.0], np.cumsum(0.5 * dt * (power[1:] + power[:-1]))])
    meta = run_metadata(config, refresh_count=refresh_count, steps=total_steps)
    traj = Trajectory(t=T, x=X, v=Vv, q_pto=-config.pto_c * zdot, power=power, energy=energy, meta=meta)
    if record_coefficients:
        traj.coefficient_series = series
    return traj


def run_metadata(config, **extra):
    wave = config.wave
    seed = getattr(wave, "seed", "none")
    meta = {
        "version": f"vsbwec-{__version__}",
        "config_hash": config.config_hash(),
        "seed": seed,
        "rng": getattr(wave, "rng", "none"),
        "mode": config.fsi_mode,
        "wave": "none" if wave is None else wave.kind,
        "pressures": config.provider.describe(),
        "n_modes": config.n_modes,
        "dt": config.dt_max,
    }
    meta.update(extra)
    return meta


def pk_pk(series):
    """Peak-to-peak value ``max - min``."""
    series = np.asarray(series, dtype=float)
    if series.size == 0:
        raise ValueError("pk_pk of an empty window")
    return float(series.max() - series.min())


def summarize(traj, transient=10.0):
    """Steady-state summary after dropping the first ``transient`` seconds.

    Energy is the total harvested over the whole run. A run shorter than the
    transient is summarized over its whole record.
    """
    if traj.t.size == 0:
        raise ValueError("empty trajectory")
    window = traj.t >= transient
    if not np.any(window):
        LOG.warning("run shorter than the %.3g s transient; summarizing the whole record", transient)
        window = np.ones(traj.t.size, dtype=bool)
    out = {
        "pkpk_z": pk_pk(traj.z[window]),
        "pkpk_zdot": pk_pk(traj.zdot[window]),
        "energy": float(traj.energy[-1]),
        "mean_power": float(np.mean(traj.power[window])),
    }
    for k in range(traj.n_modes):
        out[f"max_abs_eta_{k + 1}"] = float(np.max(np.abs(traj.eta[window, k])))
    return out


def with_mode(config, mode, **changes):
    """Copy of ``config`` with another FSI mode."""
    return replace(config, fsi_mode=mode, **changes)
