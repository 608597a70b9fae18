"""Pauli algebra, the symmetry axis and the rotated operator frame."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def principal_angle(z: complex) -> float:
    """arg(z) on the branch [-pi, pi)."""
    angle = float(np.angle(z))
    return -np.pi if angle >= np.pi else angle


@dataclass(frozen=True)
class SymmetryAxis:
    """Axis (theta, phi) on the Bloch sphere defining the mirror operator.

    theta is measured from the z axis, phi in the xy plane, so the unit
    vector is (sin(theta)cos(phi), sin(theta)sin(phi), cos(theta)).
    """

    theta: float
    phi: float

    def unit_vector(self) -> np.ndarray:
        st, ct = np.sin(self.theta), np.cos(self.theta)
        return np.array([st * np.cos(self.phi), st * np.sin(self.phi), ct])


@dataclass(frozen=True)
class HermitianOperator2:
    """A 2x2 Hermitian operator stored as real Pauli coefficients.

    Represents c0*I + cx*sigma_x + cy*sigma_y + cz*sigma_z; the reconstructed
    matrix is exactly equal to its own conjugate transpose.
    """

    c0: float
    cx: float
    cy: float
    cz: float

    def coefficients(self) -> np.ndarray:
        return np.array([self.c0, self.cx, self.cy, self.cz])

    def vector(self) -> np.ndarray:
        """The (cx, cy, cz) part."""
        return np.array([self.cx, self.cy, self.cz])

    def matrix(self) -> np.ndarray:
        return (self.c0 * SIGMA_0 + self.cx * SIGMA_X
                + self.cy * SIGMA_Y + self.cz * SIGMA_Z)

    def eigenvalues(self) -> tuple[float, float]:
        """(E_minus, E_plus) = c0 -/+ |c|."""
        r = float(np.sqrt(self.cx ** 2 + self.cy ** 2 + self.cz ** 2))
        return self.c0 - r, self.c0 + r


def operator_from_vector(vec, c0: float = 0.0) -> HermitianOperator2:
    vx, vy, vz = (float(v) for v in vec)
    return HermitianOperator2(float(c0), vx, vy, vz)


def pauli_axis(axis: SymmetryAxis) -> HermitianOperator2:
    """Pauli operator along the symmetry axis; traceless, squares to I."""
    return operator_from_vector(axis.unit_vector())


def rotated_frame(axis: SymmetryAxis):
    """The orthonormal operator triple (sigma_theta, sigma_phi, sigma_r).

    The three operators are mutually anticommuting, each squares to the
    identity, and their cyclic products reproduce the usual Pauli algebra.
    """
    ct, st = np.cos(axis.theta), np.sin(axis.theta)
    cp, sp = np.cos(axis.phi), np.sin(axis.phi)
    sigma_theta = operator_from_vector([ct * cp, ct * sp, -st])
    sigma_phi = operator_from_vector([-sp, cp, 0.0])
    return sigma_theta, sigma_phi, pauli_axis(axis)


def frame_basis_matrix(axis: SymmetryAxis) -> np.ndarray:
    """3x3 matrix whose rows are the (theta, phi, r) frame unit vectors."""
    f_theta, f_phi, f_r = rotated_frame(axis)
    return np.array([f_theta.vector(), f_phi.vector(), f_r.vector()])
