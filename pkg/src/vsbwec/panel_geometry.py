"""Axisymmetric panel mesh of the sphere, deformation kinematics and projection vectors.

Every generalized hydrodynamic quantity is a panel sum of the form
``sum_i w_i A_i b_i [1 | Phi_z,i]`` where ``b_i`` is the projection vector
``[cos psi_i, c3_i . Phi_e,i(:, 1), ..., c3_i . Phi_e,i(:, N)]`` and the row
``[1 | Phi_z,i]`` maps the generalized velocity onto the vertical velocity of
the panel. Both are produced here.
"""
import csv
from dataclasses import dataclass

import numpy as np

from .shell_modal import basis_at


class GeometryError(ValueError):
    """Bad mesh input."""


class LinearRegimeError(RuntimeError):
    """The buoy left the half-submerged linear regime (fully dry or fully wet)."""


@dataclass(frozen=True)
class Panel:
    """One panel of the mesh (a read-only view)."""

    index: int
    phi_c: float
    theta_c: float
    area: float
    normal: np.ndarray
    psi: float
    z_body: float


@dataclass(frozen=True)
class PanelMesh:
    """Panels ordered ring by ring (increasing colatitude), then by sector.

    Attributes are per-panel arrays; ``normal`` has shape (P, 3).
    """

    phi_c: np.ndarray
    theta_c: np.ndarray
    area: np.ndarray
    normal: np.ndarray
    r: float
    n_phi: int
    n_theta: int

    @property
    def n_panels(self):
        return self.phi_c.size

    @property
    def cos_psi(self):
        return self.normal[:, 2]

    @property
    def psi(self):
        return np.arccos(np.clip(self.normal[:, 2], -1.0, 1.0))

    @property
    def z_body(self):
        return self.r * np.cos(self.phi_c)

    def panel(self, i):
        return Panel(
            index=i,
            phi_c=float(self.phi_c[i]),
            theta_c=float(self.theta_c[i]),
            area=float(self.area[i]),
            normal=self.normal[i].copy(),
            psi=float(self.psi[i]),
            z_body=float(self.z_body[i]),
        )

    def __len__(self):
        return self.n_panels


def _radial(phi, theta):
    return np.stack(
        [np.sin(phi) * np.cos(theta), np.sin(phi) * np.sin(theta), np.cos(phi)], axis=-1
    )


def _meridional(phi, theta):
    return np.stack(
        [np.cos(phi) * np.cos(theta), np.cos(phi) * np.sin(theta), -np.sin(phi)], axis=-1
    )


def mesh_sphere(r, n_phi=32, n_theta=32):
    """Uniform (phi, theta) panelization of a sphere with centroids at ring midpoints."""
    if n_phi < 8 or n_theta < 8:
        raise GeometryError("n_phi and n_theta must both be at least 8")
    dphi = np.pi / n_phi
    dtheta = 2.0 * np.pi / n_theta
    rings = (np.arange(n_phi) + 0.5) * dphi
    sectors = (np.arange(n_theta) + 0.5) * dtheta
    phi_c = np.repeat(rings, n_theta)
    theta_c = np.tile(sectors, n_phi)
    area = r**2 * dphi * dtheta * np.sin(phi_c)
    normal = _radial(phi_c, theta_c)
    return PanelMesh(phi_c, theta_c, area, normal, float(r), int(n_phi), int(n_theta))


def write_mesh_csv(mesh, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "phi_c", "theta_c", "area", "nx", "ny", "nz"])
        for i in range(mesh.n_panels):
            n = mesh.normal[i]
            w.writerow([i] + [repr(float(v)) for v in (mesh.phi_c[i], mesh.theta_c[i], mesh.area[i], *n)])


def read_mesh_csv(path, r):
    """Read a mesh table written by :func:`write_mesh_csv`.

    Ring and sector counts are recovered from the distinct centroid angles.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["index", "phi_c", "theta_c", "area", "nx", "ny", "nz"]:
        raise GeometryError(f"{path}: missing or malformed mesh header")
    data = np.array([[float(v) for v in row] for row in rows[1:] if row])
    if data.size == 0:
        raise GeometryError(f"{path}: no panels")
    order = data[:, 0].astype(int)
    if not np.array_equal(order, np.arange(order.size)):
        raise GeometryError(f"{path}: panel indices must be 0..P-1 in order")
    n_phi = np.unique(data[:, 1]).size
    n_theta = np.unique(data[:, 2]).size
    return PanelMesh(
        data[:, 1].copy(), data[:, 2].copy(), data[:, 3].copy(), data[:, 4:7].copy(),
        float(r), int(n_phi), int(n_theta),
    )


def mode_vectors(mesh, basis):
    """Mode displacement vectors of every panel in body axes, shape (P, 3, N)."""
    psi_phi, psi_r = basis_at(basis, mesh.phi_c)
    e_phi = _meridional(mesh.phi_c, mesh.theta_c)
    e_r = _radial(mesh.phi_c, mesh.theta_c)
    return e_phi[:, :, None] * psi_phi[:, None, :] + e_r[:, :, None] * psi_r[:, None, :]


def deformed_positions(mesh, basis, x):
    """Deformed centroid positions in the inertial frame, shape (P, 3).

    ``x = [r_sa3, eta_1 .. eta_N]``; heave only, no rotations.
    """
    x = np.asarray(x, dtype=float)
    pos = mesh.r * _radial(mesh.phi_c, mesh.theta_c)
    pos[:, 2] += x[0]
    if basis is not None and x.size > 1:
        pos += mode_vectors(mesh, basis) @ x[1:]
    return pos


def vertical_rows(mesh, basis):
    """Rows ``[1 | (C_se Phi_e)(3, :)]`` mapping generalized velocity to panel heave."""
    ones = np.ones((mesh.n_panels, 1))
    if basis is None:
        return ones
    return np.hstack([ones, mode_vectors(mesh, basis)[:, 2, :]])


def projection_vectors(mesh, basis, normal=None):
    """Projection vectors ``b_i``, shape (P, N+1).

    ``normal`` overrides the mesh normals (deformed geometry).
    """
    normal = mesh.normal if normal is None else normal
    first = normal[:, 2:3]
    if basis is None:
        return first.copy()
    modal = np.einsum("pj,pjk->pk", normal, mode_vectors(mesh, basis))
    return np.hstack([first, modal])


def wetted_panels(mesh, basis, x, free_surface_z=0.0):
    """Indices of panels whose deformed centroid lies below the free surface.

    Raises
    ------
    LinearRegimeError
        If no panel or every panel is wet.
    """
    z = deformed_positions(mesh, basis, x)[:, 2]
    idx = np.flatnonzero(z < free_surface_z)
    if idx.size == 0:
        raise LinearRegimeError("buoy is fully out of the water")
    if idx.size == mesh.n_panels:
        raise LinearRegimeError("buoy is fully submerged")
    return idx


def deformed_mesh(mesh, basis, eta):
    """Body-frame mesh of the deformed shell (heave excluded).

    Ring centroids are displaced by the mode shapes; normals come from the
    central-difference meridian tangent (the first and last ring use their
    mirror image across the axis as ghost neighbour, so the undeformed mesh
    reproduces its radial normals exactly), and areas are scaled by the change
    of ring radius times meridian arc length. Requires a mesh from
    :func:`mesh_sphere` (or any mesh with the same ring/sector ordering).
    """
    eta = np.asarray(eta, dtype=float)
    n_phi, n_theta = mesh.n_phi, mesh.n_theta
    if n_phi * n_theta != mesh.n_panels:
        raise GeometryError("deformed_mesh needs a ring/sector ordered mesh")
    rings = mesh.phi_c[::n_theta]
    psi_phi, psi_r = basis_at(basis, rings)
    u = psi_phi @ eta
    v = psi_r @ eta
    # meridian point (R, Z) of each ring in the body frame
    R0 = mesh.r * np.sin(rings)
    Z0 = mesh.r * np.cos(rings)
    R = R0 + u * np.cos(rings) + v * np.sin(rings)
    Z = Z0 - u * np.sin(rings) + v * np.cos(rings)

    def tangents(Rs, Zs):
        Rp = np.concatenate([[-Rs[0]], Rs, [-Rs[-1]]])
        Zp = np.concatenate([[Zs[0]], Zs, [Zs[-1]]])
        return Rp[2:] - Rp[:-2], Zp[2:] - Zp[:-2]

    tR, tZ = tangents(R, Z)
    tR0, tZ0 = tangents(R0, Z0)
    tlen = np.hypot(tR, tZ)
    nR, nZ = -tZ / tlen, tR / tlen
    scale = (R * tlen) / (R0 * np.hypot(tR0, tZ0))

    theta = mesh.theta_c
    nR_p = np.repeat(nR, n_theta)
    normal = np.stack([nR_p * np.cos(theta), nR_p * np.sin(theta), np.repeat(nZ, n_theta)], axis=-1)
    area = mesh.area * np.repeat(scale, n_theta)
    z_body = np.repeat(Z, n_theta)
    x_body = np.repeat(R, n_theta) * np.cos(theta)
    return DeformedGeometry(normal=normal, area=area, z_body=z_body, x_body=x_body)


@dataclass(frozen=True)
class DeformedGeometry:
    """Per-panel normals, areas and body-frame centroid coordinates."""

    normal: np.ndarray
    area: np.ndarray
    z_body: np.ndarray
    x_body: np.ndarray


def undeformed_geometry(mesh):
    return DeformedGeometry(
        normal=mesh.normal,
        area=mesh.area,
        z_body=mesh.r * np.cos(mesh.phi_c),
        x_body=mesh.r * np.sin(mesh.phi_c) * np.cos(mesh.theta_c),
    )
