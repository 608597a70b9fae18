"""Instantaneous eigenframes with a fixed gauge, occupations and phases.

The first half of the protocol uses the transformed gauge: the product
<v_plus|0><0|v_minus> is real and non-negative and det[v_minus, v_plus]
equals 1.  For t > T/2 the frame is generated from the mirrored time by
the symmetry operator, v_pm(t) = sigma_r v_mp(T - t), which keeps the
energy ordering consistent with the mirrored spectrum E_pm(t) =
-E_mp(T - t).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import simpson

from .errors import DegenerateInputError, DegenerateSpectrumError
from .pauli import SymmetryAxis, pauli_axis, principal_angle
from .propagator import Trajectory
from .schedules import TlsSchedule, rotated_coefficients

_GAP_FLOOR = 1e-12


def _gauge_vectors(dx: float, dy: float, dz: float):
    """Gauge-fixed eigenvector pair of (d . sigma) for a nonzero field.

    With rho = |dx + i dy| and lam = arg(dx + i dy):
        v_minus = (cos(eta) e^{-i lam/2}, -sin(eta) e^{+i lam/2})
        v_plus  = (sin(eta) e^{-i lam/2},  cos(eta) e^{+i lam/2})
    where cos(eta)^2 = (E - dz)/2E, sin(eta)^2 = (E + dz)/2E with eta in
    [0, pi/2].  This pair satisfies both gauge conditions with
    <v_plus|0><0|v_minus> = rho/2E >= 0 and det = 1.
    """
    e = np.sqrt(dx * dx + dy * dy + dz * dz)
    rho = np.hypot(dx, dy)
    if rho < 1e-15 * max(e, 1.0):
        # gauge condition vacuous; pin the surviving component real-positive
        if dz > 0:
            return np.array([0.0, 1.0], dtype=complex), np.array([-1.0, 0.0], dtype=complex)
        return np.array([1.0, 0.0], dtype=complex), np.array([0.0, 1.0], dtype=complex)
    lam = np.arctan2(dy, dx)
    # evaluate the small branch through rho to avoid cancellation
    if dz >= 0:
        sin_eta = np.sqrt((e + dz) / (2.0 * e))
        cos_eta = rho / np.sqrt(2.0 * e * (e + dz))
    else:
        cos_eta = np.sqrt((e - dz) / (2.0 * e))
        sin_eta = rho / np.sqrt(2.0 * e * (e - dz))
    em = np.exp(-0.5j * lam)
    ep = np.exp(0.5j * lam)
    v_minus = np.array([cos_eta * em, -sin_eta * ep])
    v_plus = np.array([sin_eta * em, cos_eta * ep])
    return v_minus, v_plus


@dataclass(frozen=True)
class EigenFrame:
    """Gauge-fixed instantaneous eigenpair at one time."""

    t: float
    e_minus: float
    e_plus: float
    v_minus: np.ndarray
    v_plus: np.ndarray

    def basis_matrix(self) -> np.ndarray:
        """Columns [v_minus, v_plus]; unimodular by the gauge choice."""
        return np.column_stack([self.v_minus, self.v_plus])


def eigenframe(sched: TlsSchedule, t: float, axis: SymmetryAxis,
               half: str = "auto",
               prev: Optional[EigenFrame] = None) -> EigenFrame:
    """Gauge-fixed eigenframe of the schedule Hamiltonian at time t.

    half selects the construction branch: "first" builds the transformed
    gauge directly, "second" maps the frame at T - t through sigma_r,
    "auto" switches at T/2.  A previous frame may be supplied to keep the
    overall sign continuous along a sampled trajectory.
    """
    T = sched.duration
    if half == "auto":
        half = "first" if t <= T / 2.0 else "second"
    if half == "second":
        mirror = eigenframe(sched, T - t, axis, half="first")
        sr = pauli_axis(axis).matrix()
        v_minus = sr @ mirror.v_plus
        v_plus = sr @ mirror.v_minus
        frame = EigenFrame(t=t, e_minus=-mirror.e_plus, e_plus=-mirror.e_minus,
                           v_minus=v_minus, v_plus=v_plus)
    else:
        d0, dx, dy, dz = (float(c) for c in sched.coefficients(float(t)))
        e = float(np.sqrt(dx * dx + dy * dy + dz * dz))
        if 2.0 * e < _GAP_FLOOR:
            raise DegenerateSpectrumError(f"gap {2 * e} below floor at t={t}")
        v_minus, v_plus = _gauge_vectors(dx, dy, dz)
        frame = EigenFrame(t=t, e_minus=d0 - e, e_plus=d0 + e,
                           v_minus=v_minus, v_plus=v_plus)
    if prev is not None and np.real(np.vdot(prev.v_minus, frame.v_minus)) < 0:
        frame = EigenFrame(t=frame.t, e_minus=frame.e_minus, e_plus=frame.e_plus,
                           v_minus=-frame.v_minus, v_plus=-frame.v_plus)
    return frame


def ground_state(sched: TlsSchedule, t: float, axis: SymmetryAxis) -> np.ndarray:
    """Lower-branch eigenvector at time t in the fixed gauge."""
    return eigenframe(sched, t, axis).v_minus


@dataclass
class OccupationSeries:
    """Ground-manifold occupation along a trajectory and its derivative."""

    times: np.ndarray
    p_minus: np.ndarray
    dp_minus: np.ndarray


def occupation_series(traj: Trajectory, sched: TlsSchedule,
                      axis: SymmetryAxis) -> OccupationSeries:
    """P_minus(t) = |<E_minus(t)|psi(t)>|^2 per trajectory sample.

    The projection is evaluated from the Bloch components of the state,
    P = (1 - d_hat . s)/2, so no gauge choice enters.  The derivative
    uses 2nd-order central differences, one-sided at the endpoints.
    """
    ts = traj.times
    psi = traj.states
    c = sched.coefficients(ts)
    e = np.sqrt(c[1] ** 2 + c[2] ** 2 + c[3] ** 2)
    # zero-field samples project on the z basis by convention
    safe = np.where(e > 0, e, 1.0)
    nx, ny, nz = c[1] / safe, c[2] / safe, c[3] / safe
    nz = np.where(e > 0, nz, 1.0)
    nx = np.where(e > 0, nx, 0.0)
    ny = np.where(e > 0, ny, 0.0)
    cross = np.conj(psi[:, 0]) * psi[:, 1]
    sx = 2.0 * np.real(cross)
    sy = 2.0 * np.imag(cross)
    sz = np.abs(psi[:, 0]) ** 2 - np.abs(psi[:, 1]) ** 2
    p = 0.5 * (1.0 - (nx * sx + ny * sy + nz * sz))
    dp = np.gradient(p, ts, edge_order=2)
    return OccupationSeries(times=ts, p_minus=p, dp_minus=dp)


def _simpson_segment(sched: TlsSchedule, a: float, b: float, n: int) -> float:
    ts = np.linspace(a, b, n)
    _, e_plus = sched.energies(ts)
    return float(simpson(e_plus, x=ts))


def dynamical_phase(sched: TlsSchedule, t_f: float,
                    points_per_segment: int = 2001) -> float:
    """Upper-branch phase integral of E_plus over [t_f, T - t_f].

    The window is split at hold boundaries; the hold contributes its
    exact closed form duration * E_plus since the integrand is frozen
    there, the smooth pieces use composite Simpson quadrature.
    """
    T = sched.duration
    a, b = float(t_f), float(T - t_f)
    if not a <= b + 1e-12:
        raise ValueError("t_f must not exceed T - t_f")
    if b - a < 1e-15:
        return 0.0
    cuts = [a, b]
    if sched.hold is not None and sched.hold.duration > 0:
        h0, h1 = sched.hold.start, sched.hold.start + sched.hold.duration
        cuts += [min(max(h0, a), b), min(max(h1, a), b)]
    cuts = sorted(set(cuts))
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi - lo < 1e-15:
            continue
        if (sched.hold is not None and sched.hold.duration > 0
                and lo >= sched.hold.start - 1e-12
                and hi <= sched.hold.start + sched.hold.duration + 1e-12):
            _, e_plus = sched.energies(0.5 * (lo + hi))
            total += (hi - lo) * float(e_plus)
        else:
            total += _simpson_segment(sched, lo, hi, points_per_segment)
    return total


def phi_c(sched: TlsSchedule, axis: SymmetryAxis) -> float:
    """Half-time gauge phase: (1/2) arg(cos(theta) + i sin(theta) sin(vt))
    with vt = arg[d_theta(T/2) - i d_phi(T/2)] in the rotated frame."""
    theta = axis.theta
    sin_theta = np.sin(theta)
    if abs(sin_theta) < 1e-15:
        return 0.5 * principal_angle(np.cos(theta))
    rot = rotated_coefficients(sched, axis, sched.duration / 2.0)
    d_theta, d_phi = float(rot[1]), float(rot[2])
    if np.hypot(d_theta, d_phi) < 1e-14:
        raise DegenerateInputError(
            "d_theta and d_phi both vanish at T/2 with sin(theta) != 0")
    vt = np.angle(d_theta - 1j * d_phi)
    return 0.5 * principal_angle(np.cos(theta) + 1j * sin_theta * np.sin(vt))


def gauge_self_connection(sched: TlsSchedule, axis: SymmetryAxis,
                          n_samples: int) -> float:
    """Max |<E_minus|d/dt|E_minus>| on a first-half grid after transport.

    Builds the gauge-fixed family on (0, T/2] with an unwrapped in-plane
    angle, removes the accumulated transport phase, and measures the
    residual self-connection by central differences.  The residual is a
    pure discretization effect and decays quadratically with the grid.
    """
    T = sched.duration
    ts = np.linspace(T / (2 * n_samples), T / 2.0, n_samples)
    c = sched.coefficients(ts)
    e = np.sqrt(c[1] ** 2 + c[2] ** 2 + c[3] ** 2)
    if np.any(2 * e < _GAP_FLOOR):
        raise DegenerateSpectrumError("gap closes on the sampling grid")
    lam = np.unwrap(np.arctan2(c[2], c[1]))
    cos2eta = -c[3] / e
    chi = 0.5 * lam
    # transport phase: dgamma = cos(2 eta) dchi, anchored at T/2
    dgamma = 0.5 * (cos2eta[1:] + cos2eta[:-1]) * np.diff(chi)
    gamma = np.concatenate([[0.0], np.cumsum(dgamma)])
    gamma -= gamma[-1]
    sin_eta = np.sqrt((e + c[3]) / (2 * e))
    cos_eta = np.sqrt(np.maximum(e - c[3], 0.0) / (2 * e))
    v = np.empty((n_samples, 2), dtype=complex)
    v[:, 0] = cos_eta * np.exp(-1j * chi)
    v[:, 1] = -sin_eta * np.exp(1j * chi)
    v *= np.exp(1j * gamma)[:, None]
    dt = ts[1] - ts[0]
    deriv = (v[2:] - v[:-2]) / (2.0 * dt)
    conn = np.abs(np.einsum("ij,ij->i", np.conj(v[1:-1]), deriv))
    # hold boundaries are kinks of the family; central differences there
    # decay only first order, so they are excluded from the measure
    if sched.hold is not None and sched.hold.duration > 0:
        mids = ts[1:-1]
        for edge in (sched.hold.start, sched.hold.start + sched.hold.duration):
            conn = np.where(np.abs(mids - edge) <= 2.0 * dt, 0.0, conn)
    return float(np.max(conn))
