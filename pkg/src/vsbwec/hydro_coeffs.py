"""Generalized hydrodynamic coefficients assembled from per-panel pressures.

Sign conventions (fixed once, here):

* excitation ``Ex = -sum p_ex A b``   (positive heave force under a crest)
* hydrostatics ``K_h = -rho g sum A b [1 | Phi_z]``   (positive restoring)
* radiation damping ``D_r = sum Re(p_rd) A b [1 | Phi_z]``
* added mass ``M_inf = sum Im(p_rd)/omega A b [1 | Phi_z]``

For the last two a physical pressure set has in-phase suction on the wetted
bottom, so ``D_r[0, 0] >= 0`` and ``M_inf[0, 0] >= 0``. The built-in
radiation surrogate carries the matching leading minus.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from .panel_geometry import (
    deformed_mesh,
    projection_vectors,
    undeformed_geometry,
    vertical_rows,
)

LOG = logging.getLogger(__name__)

SIGMA_EX = -1.0
SIGMA_H = -1.0
SIGMA_RAD = 1.0

RHO_W = 1000.0
G = 9.81


class HydroError(ValueError):
    """Invalid input to a coefficient assembly."""


class PressureFileError(ValueError):
    """Malformed pressure file; ``code`` names the failure."""

    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class PressureSet:
    """Frequency-domain panel pressures.

    ``p_ex`` and ``p_rd`` have shape (F, P): excitation pressure per metre of
    wave amplitude and radiation pressure per unit heave velocity.
    """

    omegas: np.ndarray
    p_ex: np.ndarray
    p_rd: np.ndarray
    source: str = "bem_file"

    def __post_init__(self):
        om = np.asarray(self.omegas, dtype=float)
        if om.ndim != 1 or om.size == 0:
            raise HydroError("frequency grid must be a non-empty 1-D array")
        if om.size > 1 and np.any(np.diff(om) <= 0):
            raise HydroError("non-monotone frequency grid")
        if self.p_ex.shape != self.p_rd.shape or self.p_ex.shape[0] != om.size:
            raise HydroError("pressure arrays must have shape (n_freq, n_panels)")

    @property
    def n_panels(self):
        return self.p_ex.shape[1]


@dataclass(frozen=True)
class GeneralizedCoefficients:
    """Generalized coefficients of one frequency, all of size N+1."""

    M_inf: np.ndarray
    D_r: np.ndarray
    K_h: np.ndarray
    Ex: np.ndarray
    omega: float


@dataclass(frozen=True)
class RetardationKernel:
    """Sampled radiation memory function ``K(tau)``, shape (L, n, n)."""

    taus: np.ndarray
    K: np.ndarray
    omega_max: float
    dt: float = field(init=False)

    def __post_init__(self):
        dt = float(self.taus[1] - self.taus[0]) if self.taus.size > 1 else 0.0
        object.__setattr__(self, "dt", dt)

    def at(self, lag):
        """Kernel at an arbitrary lag by linear interpolation (zero past the horizon)."""
        s = lag / self.dt
        j = int(np.floor(s))
        L = self.K.shape[0]
        if lag < 0 or j >= L:
            return np.zeros_like(self.K[0])
        frac = s - j
        upper = self.K[j + 1] if j + 1 < L else 0.0
        return (1.0 - frac) * self.K[j] + frac * upper


@dataclass(frozen=True)
class HydroGeometry:
    """Everything a panel sum needs: wet areas, projection vectors and vertical rows.

    Built from the undeformed mesh (one-way) or from the deformed shell
    (two-way). Arrays cover all panels; ``wet`` is a boolean mask.
    """

    area: np.ndarray
    b: np.ndarray
    rows: np.ndarray
    z_body: np.ndarray
    x_body: np.ndarray
    wet: np.ndarray

    @classmethod
    def from_mesh(cls, mesh, basis, wetted=None, eta=None):
        if eta is not None and basis is not None and np.any(eta):
            geo = deformed_mesh(mesh, basis, eta)
        else:
            geo = undeformed_geometry(mesh)
        if wetted is None:
            wet = geo.z_body < 0.0
        else:
            wet = np.zeros(mesh.n_panels, dtype=bool)
            wet[np.asarray(wetted, dtype=int)] = True
        return cls(
            area=geo.area,
            b=projection_vectors(mesh, basis, geo.normal),
            rows=vertical_rows(mesh, basis),
            z_body=geo.z_body,
            x_body=geo.x_body,
            wet=wet,
        )

    @property
    def n_panels(self):
        return self.area.size

    @property
    def size(self):
        return self.b.shape[1]


def _check_panels(geom, values):
    values = np.asarray(values)
    if values.shape[-1] != geom.n_panels:
        raise HydroError(f"panel count mismatch: {values.shape[-1]} values for {geom.n_panels} panels")
    return values


def _weights(geom, values):
    return np.where(geom.wet, values * geom.area, 0.0)


def excitation_coeff(geom, p_ex):
    """Generalized excitation coefficient ``Ex`` (complex, N+1) for one frequency."""
    p_ex = _check_panels(geom, p_ex)
    return SIGMA_EX * (geom.b.T @ _weights(geom, p_ex))


def _outer_sum(geom, weights):
    return (geom.b * weights[:, None]).T @ geom.rows


def hydrostatic_matrix(geom, rho_w=RHO_W, g=G):
    """Generalized hydrostatic stiffness ``K_h``, (N+1) x (N+1), non-symmetric in general."""
    if not np.any(geom.wet):
        raise HydroError("empty wetted set")
    return SIGMA_H * rho_w * g * _outer_sum(geom, _weights(geom, np.ones(geom.n_panels)))


def radiation_matrices(geom, p_rd, omega):
    """Radiation damping and added mass matrices at one frequency.

    Returns
    -------
    D_r, M_inf : ndarray, shape (N+1, N+1)
    """
    if omega <= 0:
        raise HydroError("radiation matrices need omega > 0")
    p_rd = _check_panels(geom, p_rd)
    D = SIGMA_RAD * _outer_sum(geom, _weights(geom, p_rd.real))
    M = SIGMA_RAD * _outer_sum(geom, _weights(geom, p_rd.imag / omega))
    return D, M


def generalized_coefficients(geom, p_ex, p_rd, omega, rho_w=RHO_W, g=G):
    D, M = radiation_matrices(geom, p_rd, omega)
    return GeneralizedCoefficients(
        M_inf=M, D_r=D, K_h=hydrostatic_matrix(geom, rho_w, g),
        Ex=excitation_coeff(geom, p_ex), omega=float(omega),
    )


def fk_pressure(geom, omega, rho_w=RHO_W, g=G, z_w=0.0):
    """Deep-water Froude-Krylov pressure per metre of wave amplitude.

    Uses body-relative centroid elevation measured from the waterline
    ``z_w``; the pressure decays as ``exp(k (z - z_w))`` below it.
    """
    k = omega**2 / g
    return rho_w * g * np.exp(k * ((geom.z_body - z_w) + 1j * geom.x_body))


def radiation_surrogate(geom, omega, kappa_d, kappa_a, rho_w=RHO_W, g=G):
    """Parametric radiation pressure ``-rho omega (kappa_d + i kappa_a omega) exp(k z)``.

    A smooth test fixture, not a hydrodynamic model: decays with depth like a
    deep-water mode and gives non-negative heave damping and added mass.
    """
    k = omega**2 / g
    return -rho_w * omega * (kappa_d + 1j * kappa_a * omega) * np.exp(k * geom.z_body)


def surrogate_pressures(geom, omegas, kappa_d=0.1, kappa_a=0.6, rho_w=RHO_W, g=G):
    """Froude-Krylov excitation plus the radiation surrogate on a frequency grid."""
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    p_ex = np.array([fk_pressure(geom, w, rho_w, g) for w in omegas])
    p_rd = np.array([radiation_surrogate(geom, w, kappa_d, kappa_a, rho_w, g) for w in omegas])
    return PressureSet(omegas, p_ex, p_rd, source="fk_surrogate")


def coefficients_on_grid(geom, pressures, rho_w=RHO_W, g=G):
    """Per-frequency coefficients for every frequency of a pressure set."""
    if pressures.n_panels != geom.n_panels:
        raise HydroError(f"panel count mismatch: {pressures.n_panels} vs {geom.n_panels}")
    K_h = hydrostatic_matrix(geom, rho_w, g)
    out = []
    for w, pe, pr in zip(pressures.omegas, pressures.p_ex, pressures.p_rd):
        D, M = radiation_matrices(geom, pr, w)
        out.append(GeneralizedCoefficients(M_inf=M, D_r=D, K_h=K_h, Ex=excitation_coeff(geom, pe), omega=float(w)))
    return out


def interpolate(omegas, values, omega):
    """Piecewise-linear interpolation of stacked values in frequency; no extrapolation."""
    omegas = np.asarray(omegas, dtype=float)
    values = np.asarray(values)
    tol = 1e-12 * max(1.0, abs(omegas[-1]))
    if omega < omegas[0] - tol or omega > omegas[-1] + tol:
        raise HydroError(f"omega = {omega:.6g} lies outside the coefficient grid "
                         f"[{omegas[0]:.6g}, {omegas[-1]:.6g}]")
    if omegas.size == 1:
        return values[0]
    j = int(np.clip(np.searchsorted(omegas, omega) - 1, 0, omegas.size - 2))
    s = (omega - omegas[j]) / (omegas[j + 1] - omegas[j])
    s = min(max(s, 0.0), 1.0)
    return (1.0 - s) * values[j] + s * values[j + 1]


def retardation_kernel(omegas, D, t_max, dt):
    """Cosine transform ``K(t) = (2/pi) int D(omega) cos(omega t) d omega``.

    Trapezoid rule over the supplied frequency grid, entrywise on the
    matrices ``D`` of shape (F, n, n) (or (F,) for a scalar curve).
    """
    omegas = np.asarray(omegas, dtype=float)
    D = np.asarray(D, dtype=float)
    omega_max = float(omegas[-1])
    if dt > np.pi / omega_max:
        raise HydroError(f"kernel step {dt} s aliases omega_max = {omega_max} rad/s "
                         f"(need dt <= {np.pi / omega_max:.4g} s)")
    taus = np.arange(int(round(t_max / dt)) + 1) * dt
    w = np.zeros_like(omegas)
    dw = np.diff(omegas)
    w[:-1] += 0.5 * dw
    w[1:] += 0.5 * dw
    cos = np.cos(np.outer(taus, omegas)) * w
    K = (2.0 / np.pi) * np.tensordot(cos, D, axes=(1, 0))
    tail = np.abs(K[-1]).max()
    peak = np.abs(K).max()
    if peak > 0 and tail > 0.01 * peak:
        LOG.warning("retardation kernel tail is %.2g of its peak at t = %.3g s", tail / peak, taus[-1])
    return RetardationKernel(taus=taus, K=K, omega_max=omega_max)


def reynolds_average(series, times=None):
    """Time mean of a series of coefficient sets.

    With ``times`` the mean is trapezoidal in time, otherwise a plain
    sample mean. A single set (the undeformed-shape shortcut) is returned
    unchanged.
    """
    series = list(series)
    if not series:
        raise HydroError("cannot average an empty coefficient series")
    if len(series) == 1:
        return series[0]

    def mean(attr):
        stack = np.array([getattr(c, attr) for c in series])
        if times is None:
            return stack.mean(axis=0)
        t = np.asarray(times, dtype=float)
        return np.trapezoid(stack, t, axis=0) / (t[-1] - t[0])

    return GeneralizedCoefficients(
        M_inf=mean("M_inf"), D_r=mean("D_r"), K_h=mean("K_h"), Ex=mean("Ex"),
        omega=series[0].omega,
    )


HEADER = "VSBPRES v1"


def write_pressure_file(pressures, path):
    with open(path, "w") as fh:
        fh.write(HEADER + "\n")
        fh.write(f"nfreq {pressures.omegas.size} npanels {pressures.n_panels}\n")
        for w, pe, pr in zip(pressures.omegas, pressures.p_ex, pressures.p_rd):
            fh.write(f"omega {float(w):.17e}\n")
            for i in range(pe.size):
                fh.write(f"{i} {pe[i].real:.17e} {pe[i].imag:.17e} {pr[i].real:.17e} {pr[i].imag:.17e}\n")


def read_pressure_file(path, n_panels=None):
    """Read a ``VSBPRES v1`` file. ``n_panels`` checks the count against a mesh."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != HEADER:
        raise PressureFileError("malformed_header", f"{path}: malformed header (expected '{HEADER}')")
    head = lines[1].split() if len(lines) > 1 else []
    if len(head) != 4 or head[0] != "nfreq" or head[2] != "npanels":
        raise PressureFileError("malformed_header", f"{path}: malformed size line")
    nfreq, npan = int(head[1]), int(head[3])
    if n_panels is not None and npan != n_panels:
        raise PressureFileError("panel_count_mismatch",
                                f"{path}: panel count mismatch ({npan} in file, {n_panels} in mesh)")
    body = lines[2:]
    if len(body) != nfreq * (npan + 1):
        raise PressureFileError("frequency_count_mismatch",
                                f"{path}: frequency count mismatch (header says {nfreq})")
    omegas = np.empty(nfreq)
    p_ex = np.empty((nfreq, npan), dtype=complex)
    p_rd = np.empty((nfreq, npan), dtype=complex)
    for f in range(nfreq):
        block = body[f * (npan + 1):(f + 1) * (npan + 1)]
        tag = block[0].split()
        if len(tag) != 2 or tag[0] != "omega":
            raise PressureFileError("frequency_count_mismatch", f"{path}: expected an 'omega' line")
        omegas[f] = float(tag[1])
        for i, ln in enumerate(block[1:]):
            parts = ln.split()
            if len(parts) != 5 or int(parts[0]) != i:
                raise PressureFileError("panel_count_mismatch", f"{path}: bad panel line '{ln}'")
            a, b, c, d = (float(v) for v in parts[1:])
            p_ex[f, i] = complex(a, b)
            p_rd[f, i] = complex(c, d)
    if nfreq > 1 and np.any(np.diff(omegas) <= 0):
        raise PressureFileError("non_monotone", f"{path}: non-monotone frequency grid")
    return PressureSet(omegas, p_ex, p_rd, source="bem_file")


class SurrogateProvider:
    """Froude-Krylov excitation and the parametric radiation surrogate on any geometry."""

    source = "fk_surrogate"

    def __init__(self, kappa_d=0.1, kappa_a=0.6, rho_w=RHO_W, g=G):
        if kappa_d < 0 or kappa_a < 0:
            raise HydroError("surrogate multipliers must be non-negative")
        self.kappa_d, self.kappa_a, self.rho_w, self.g = kappa_d, kappa_a, rho_w, g

    def __call__(self, geom, omegas):
        """Pressures of shape (F, P) at the frequencies ``omegas``."""
        ps = surrogate_pressures(geom, omegas, self.kappa_d, self.kappa_a, self.rho_w, self.g)
        return ps.p_ex, ps.p_rd

    def describe(self):
        return f"fk_surrogate(kappa_d={self.kappa_d!r}, kappa_a={self.kappa_a!r})"


class TabulatedProvider:
    """Pressures from a BEM table, interpolated linearly in frequency.

    The table belongs to one fixed panel layout; the geometry only has to
    match its panel count.
    """

    source = "bem_file"

    def __init__(self, pressures):
        self.pressures = pressures

    def __call__(self, geom, omegas):
        if self.pressures.n_panels != geom.n_panels:
            raise HydroError(f"panel count mismatch: {self.pressures.n_panels} vs {geom.n_panels}")
        omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
        p_ex = np.array([interpolate(self.pressures.omegas, self.pressures.p_ex, w) for w in omegas])
        p_rd = np.array([interpolate(self.pressures.omegas, self.pressures.p_rd, w) for w in omegas])
        return p_ex, p_rd

    def describe(self):
        return f"bem_file(nfreq={self.pressures.omegas.size}, npanels={self.pressures.n_panels})"
