"""Legendre modal basis and structural matrices of an axisymmetric spherical shell.

The shell displacement is expanded as ``u = Psi_phi @ eta`` (tangential, along
the meridian) and ``v = Psi_r @ eta`` (radial), with one trial function per
retained mode order ``n = 0, 1, ..., N-1`` on the membrane branch.

Two literal readings are adopted here and kept on purpose:

* the natural frequency relation is evaluated as ``omega**2 = E / (r**2 rho Omega**2)``,
  with the frequency parameter in the denominator. It is only a diagnostic and
  never enters the equations of motion;
* the radial amplitude factor is read as ``(2 + nu) Omega**2 / (1 - Omega**2)``.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.special import lpmv, roots_legendre


class ShellModelError(ValueError):
    """Invalid shell properties or an ill-posed modal basis."""


@dataclass(frozen=True)
class ShellProperties:
    """Geometry, material and modal truncation of the spherical shell.

    Parameters
    ----------
    r : float
        Undeformed radius (m).
    h : float
        Wall thickness (m).
    E : float
        Young's modulus (Pa).
    nu : float
        Poisson ratio.
    rho : float
        Shell material density (kg/m^3).
    N : int
        Number of retained modes.
    alpha_d, beta_d : float
        Rayleigh mass (1/s) and stiffness (s) damping multipliers.
    """

    r: float
    h: float
    E: float
    nu: float
    rho: float
    N: int = 4
    alpha_d: float = 0.0
    beta_d: float = 0.0

    def __post_init__(self):
        if not (self.r > 0 and self.h > 0):
            raise ShellModelError("radius and thickness must be positive")
        if self.h / self.r >= 0.2:
            raise ShellModelError(f"h/r = {self.h / self.r:.3g} violates the thin-shell limit 0.2")
        if not self.E > 0:
            raise ShellModelError("Young's modulus must be positive")
        if not 0.0 <= self.nu < 0.5:
            raise ShellModelError("Poisson ratio must lie in [0, 0.5)")
        if not self.rho > 0:
            raise ShellModelError("density must be positive")
        if int(self.N) != self.N or self.N < 1:
            raise ShellModelError("at least one mode must be retained")
        if self.alpha_d < 0 or self.beta_d < 0:
            raise ShellModelError("damping multipliers must be non-negative")

    @property
    def m_total(self):
        """Shell mass 4 pi r^2 h rho (kg)."""
        return 4.0 * np.pi * self.r**2 * self.h * self.rho


def legendre_pair(n, phi):
    """Legendre function P_n(cos phi) and its colatitude derivative.

    Parameters
    ----------
    n : int
        Mode order, ``n >= 0``.
    phi : float or array_like
        Colatitude in radians, within ``[0, pi]``.

    Returns
    -------
    p, dp : ndarray
        ``P_n(cos phi)`` and ``d P_n(cos phi) / d phi``.
    """
    if n < 0:
        raise ValueError("mode order must be non-negative")
    phi = np.asarray(phi, dtype=float)
    x = np.cos(phi)
    p = lpmv(0, n, x)
    # with the Condon-Shortley phase, P_n^1(cos phi) = -sin(phi) P_n'(cos phi) = dP_n/dphi
    dp = lpmv(1, n, x) if n > 0 else np.zeros_like(x)
    return p, dp


def freq_param(n, props, form="thin_shell"):
    """Both branches of the dimensionless frequency parameter Omega_n^2.

    Parameters
    ----------
    n : int
        Mode order.
    props : ShellProperties
    form : {"thin_shell", "printed"}
        ``"thin_shell"`` scales the ``[(m+1)^2 - nu^2] / 12`` term of B-bar by
        ``(h/r)^2`` as in the classical shell frequency equation. ``"printed"``
        drops that factor; its discriminant is negative for every ``n >= 3``,
        so it only supports ``N <= 3``.

    Returns
    -------
    (plus, minus) : tuple of float
        The ``+`` and ``-`` roots. The ``-`` root is the membrane branch used
        throughout the package; it vanishes exactly for ``n = 1``.
    """
    nu = props.nu
    hr = props.h / props.r
    m = n * (n + 1) - 2
    bend = hr**2 if form == "thin_shell" else 1.0
    if form not in ("thin_shell", "printed"):
        raise ValueError(f"unknown frequency form {form!r}")
    b_bar = 1.0 + nu**2 + bend * ((m + 1) ** 2 - nu**2) / 12.0
    a_bar = 3.0 * (1.0 + nu) + m + 0.5 * hr**2 * (m + 3) * (m + 1 + nu)
    disc = a_bar**2 - 4.0 * m * b_bar
    if disc < 0:
        raise ShellModelError(f"negative discriminant for n={n}: invalid property combination")
    root = np.sqrt(disc)
    scale = 1.0 / (2.0 * (1.0 - nu**2))
    if m == 0:
        return scale * 2.0 * a_bar, 0.0
    return scale * (a_bar + root), scale * (a_bar - root)


def natural_freq_from_param(omega2, E, r, rho):
    """Natural frequency (rad/s) from a frequency parameter, as ``E / (r^2 rho Omega^2)``."""
    if omega2 == 0.0:
        raise ShellModelError("rigid mode: natural frequency undefined for Omega^2 = 0")
    w2 = E / (r**2 * rho * omega2)
    if w2 < 0:
        raise ShellModelError(f"Omega^2 = {omega2:.6g} < 0 gives an imaginary frequency")
    return float(np.sqrt(w2))


def natural_freq(n, props, branch="membrane", form="thin_shell"):
    """Diagnostic natural frequency of mode order ``n`` (rad/s).

    ``branch`` is ``"membrane"`` (minus root) or ``"bending"`` (plus root).
    """
    plus, minus = freq_param(n, props, form)
    omega2 = minus if branch == "membrane" else plus
    return natural_freq_from_param(omega2, props.E, props.r, props.rho)


@dataclass(frozen=True)
class ModalBasis:
    """Membrane-branch Legendre trial functions for modes ``n = 0 .. N-1``."""

    props: ShellProperties
    A_norm: float = 1.0
    form: str = "thin_shell"
    mode_index_map: tuple = field(init=False)
    omega2: np.ndarray = field(init=False, repr=False)
    radial_factor: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        nmodes = int(self.props.N)
        omega2 = np.array([freq_param(n, self.props, self.form)[1] for n in range(nmodes)])
        if np.any(np.isclose(omega2, 1.0, rtol=0.0, atol=1e-12)):
            raise ShellModelError("a retained mode has Omega^2 = 1 (singular radial amplitude)")
        factor = (2.0 + self.props.nu) * omega2 / (1.0 - omega2)
        object.__setattr__(self, "mode_index_map", tuple((n, "membrane") for n in range(nmodes)))
        object.__setattr__(self, "omega2", omega2)
        object.__setattr__(self, "radial_factor", factor)

    @property
    def N(self):
        return len(self.mode_index_map)

    @property
    def r(self):
        return self.props.r

    def with_norm(self, A_norm):
        return ModalBasis(self.props, A_norm, self.form)


def basis_at(basis, phi):
    """Evaluate the tangential and radial trial functions at colatitudes ``phi``.

    Returns
    -------
    psi_phi, psi_r : ndarray, shape (len(phi), N)
    """
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    psi_phi = np.empty((phi.size, basis.N))
    psi_r = np.empty((phi.size, basis.N))
    for k, (n, _) in enumerate(basis.mode_index_map):
        p, dp = legendre_pair(n, phi)
        psi_phi[:, k] = basis.A_norm * dp
        psi_r[:, k] = basis.A_norm * basis.radial_factor[k] * p
    return psi_phi, psi_r


def mode_shape_matrix(basis, phi):
    """Mode shapes Phi_e in the local (e1, e2, e3) frame, shape (len(phi), 3, N)."""
    psi_phi, psi_r = basis_at(basis, phi)
    out = np.zeros((psi_phi.shape[0], 3, basis.N))
    out[:, 0, :] = psi_phi
    out[:, 2, :] = psi_r
    return out


@dataclass(frozen=True)
class StructuralMatrices:
    """Generalized mass, stiffness and proportional damping of the shell modes."""

    M_ee: np.ndarray
    K_ee: np.ndarray
    D_ee: np.ndarray


def _strain_columns(basis, x):
    """Strain shape rows zeta_phiphi, zeta_thetatheta at ``cos(phi) = x``.

    Written through the Legendre equation so that cot(phi) never appears
    explicitly: for P = P_n(cos phi),
    d2P/dphi2 = -n(n+1) P - cot(phi) dP/dphi and cot(phi) dP/dphi = -x P'(x).
    """
    phi = np.arccos(x)
    zpp = np.empty((x.size, basis.N))
    ztt = np.empty((x.size, basis.N))
    psi_phi = np.empty((x.size, basis.N))
    psi_r = np.empty((x.size, basis.N))
    sin = np.sin(phi)
    for k, (n, _) in enumerate(basis.mode_index_map):
        p, dp = legendre_pair(n, phi)
        cot_dp = dp * x / sin
        d2p = -n * (n + 1) * p - cot_dp
        c = basis.radial_factor[k]
        psi_phi[:, k] = basis.A_norm * dp
        psi_r[:, k] = basis.A_norm * c * p
        zpp[:, k] = basis.A_norm * (d2p + c * p)
        ztt[:, k] = basis.A_norm * (cot_dp + c * p)
    return psi_phi, psi_r, zpp, ztt


def assemble_structural(basis, quad_order=None):
    """Assemble M_ee, K_ee and D_ee by Gauss-Legendre quadrature over the meridian.

    The meridian integral is taken in ``x = cos(phi)``, which absorbs the
    ``sin(phi)`` Jacobian; nodes are strictly interior so the poles are never
    evaluated. The default order is ``4N + 8``.
    """
    props = basis.props
    if quad_order is None:
        quad_order = 4 * basis.N + 8
    if quad_order < 2 * basis.N + 2:
        raise ShellModelError(f"quad_order must be at least 2N+2 = {2 * basis.N + 2}")
    x, w = roots_legendre(quad_order)
    psi_phi, psi_r, zpp, ztt = _strain_columns(basis, x)

    M = 2.0 * np.pi * props.rho * props.h * props.r**2 * (
        (psi_phi * w[:, None]).T @ psi_phi + (psi_r * w[:, None]).T @ psi_r
    )
    integrand = (
        (zpp * w[:, None]).T @ zpp
        + (ztt * w[:, None]).T @ ztt
        + props.nu * ((zpp * w[:, None]).T @ ztt + (ztt * w[:, None]).T @ zpp)
    )
    K = 2.0 * np.pi * props.E * props.h / (1.0 - props.nu**2) * integrand
    M = 0.5 * (M + M.T)
    K = 0.5 * (K + K.T)
    if not (np.all(np.isfinite(M)) and np.all(np.isfinite(K))):
        raise ShellModelError("non-finite entry in the structural matrices")
    try:
        np.linalg.cholesky(M)
    except np.linalg.LinAlgError as exc:
        raise ShellModelError("generalized mass matrix is not positive definite") from exc
    eig = np.linalg.eigvalsh(K)
    if eig.min() < -1e-9 * np.linalg.norm(K):
        raise ShellModelError("generalized stiffness matrix is not positive semidefinite")
    D = props.alpha_d * M + props.beta_d * K
    return StructuralMatrices(M_ee=M, K_ee=K, D_ee=D)
