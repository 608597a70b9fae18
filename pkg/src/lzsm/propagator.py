"""Unitary time-ordered evolution with a midpoint-frozen exponential rule.

Each step multiplies the state by exp(-i H(t_mid) dt).  For two-level
schedules the exponential is evaluated in closed form; for larger
Hermitian matrices it is computed by eigendecomposition of the frozen
midpoint matrix.  Both variants are exactly unitary up to rounding, so
norm conservation holds along arbitrarily long trajectories.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InvalidStateError
from .pauli import HermitianOperator2
from .schedules import TlsSchedule

DEFAULT_STEP_CEILING = 2 ** 24


def default_tls_steps(total_time: float) -> int:
    """Default step count for two-level runs: max(1e4, 200*T)."""
    return max(10_000, int(np.ceil(200.0 * total_time)))


@dataclass
class Trajectory:
    """Sampled evolution: times[k] with the state at each sample."""

    times: np.ndarray
    states: np.ndarray

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def state_at(self, t: float) -> tuple[float, np.ndarray]:
        """Sample (time, state) closest to t."""
        k = int(np.argmin(np.abs(self.times - t)))
        return float(self.times[k]), self.states[k]


def step_unitary_2x2(op: HermitianOperator2, dt: float) -> np.ndarray:
    """Closed-form exp(-i H dt) for H = c0*I + c.sigma.

    Equals e^{-i c0 dt} [cos(|c| dt) I - i sin(|c| dt) (c_hat . sigma)];
    the |c| = 0 case reduces to the pure phase e^{-i c0 dt} I.
    """
    c = op.vector()
    r = float(np.linalg.norm(c))
    cos_t = np.cos(r * dt)
    sinc_t = dt * np.sinc(r * dt / np.pi)  # sin(r dt)/r, finite at r = 0
    phase = np.exp(-1j * op.c0 * dt)
    cx, cy, cz = c
    return phase * np.array(
        [[cos_t - 1j * sinc_t * cz, -1j * sinc_t * (cx - 1j * cy)],
         [-1j * sinc_t * (cx + 1j * cy), cos_t + 1j * sinc_t * cz]])


def _batch_unitaries_2x2(coeffs: np.ndarray, dt: float) -> np.ndarray:
    """Vectorized step_unitary_2x2 for coefficient columns (4, n)."""
    d0, dx, dy, dz = coeffs
    r = np.sqrt(dx * dx + dy * dy + dz * dz)
    cos_t = np.cos(r * dt)
    sinc_t = dt * np.sinc(r * dt / np.pi)
    phase = np.exp(-1j * d0 * dt)
    us = np.empty((coeffs.shape[1], 2, 2), dtype=complex)
    us[:, 0, 0] = phase * (cos_t - 1j * sinc_t * dz)
    us[:, 0, 1] = phase * (-1j * sinc_t * (dx - 1j * dy))
    us[:, 1, 0] = phase * (-1j * sinc_t * (dx + 1j * dy))
    us[:, 1, 1] = phase * (cos_t + 1j * sinc_t * dz)
    return us


def _midpoint_matrices(system, times: np.ndarray) -> np.ndarray:
    """Stack of Hermitian matrices H(t) for the generic evolution path."""
    if hasattr(system, "matrix_batch"):
        return np.asarray(system.matrix_batch(times))
    if hasattr(system, "matrix"):
        return np.array([system.matrix(t) for t in times])
    return np.array([system(t) for t in times])


def _check_normalized(psi: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > tol:
        raise InvalidStateError(f"state norm {nrm} deviates from 1")
    return psi


_EIGH_CHUNK_ENTRIES = 2 ** 21  # bounds the batched-eigh working set


def evolve(system, psi0, t0: float, t1: float, n_steps: int,
           max_samples: int | None = None) -> Trajectory:
    """Propagate psi0 from t0 to t1 in n_steps midpoint-rule steps.

    Parameters
    ----------
    system : TlsSchedule, object with matrix(t)/matrix_batch(ts), or callable
        Source of the time-dependent Hermitian generator (units of J).
    psi0 : array
        Unit-norm initial state.
    max_samples : int, optional
        Decimate the recorded trajectory to at most this many samples
        (step boundaries); the initial and final states are always kept.
        Two-level runs record every boundary by default, larger systems
        default to 10000 samples.

    Returns
    -------
    Trajectory
        States at the recorded step boundaries.
    """
    if not t1 > t0:
        raise ValueError("t1 must exceed t0")
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    psi = _check_normalized(psi0)
    dt = (t1 - t0) / n_steps

    if max_samples is None and psi.shape[0] > 2:
        max_samples = 10_000  # memory discipline for long chain runs
    stride = 1
    if max_samples is not None and n_steps + 1 > max_samples:
        stride = int(np.ceil((n_steps + 1) / max_samples))
    rec_idx = [0]
    rec_states = [psi.copy()]

    if isinstance(system, TlsSchedule):
        mids = t0 + (np.arange(n_steps) + 0.5) * dt
        us = _batch_unitaries_2x2(system.coefficients(mids), dt)
        for k in range(n_steps):
            psi = us[k] @ psi
            if (k + 1) % stride == 0 or k == n_steps - 1:
                rec_idx.append(k + 1)
                rec_states.append(psi.copy())
    else:
        dim = psi.shape[0]
        chunk = max(1, _EIGH_CHUNK_ENTRIES // (dim * dim))
        k = 0
        while k < n_steps:
            m = min(chunk, n_steps - k)
            mids = t0 + (np.arange(k, k + m) + 0.5) * dt
            hs = _midpoint_matrices(system, mids)
            evals, evecs = np.linalg.eigh(hs)
            phases = np.exp(-1j * evals * dt)
            for j in range(m):
                v = evecs[j]
                psi = v @ (phases[j] * (v.conj().T @ psi))
                idx = k + j + 1
                if idx % stride == 0 or idx == n_steps:
                    rec_idx.append(idx)
                    rec_states.append(psi.copy())
            k += m

    times = t0 + dt * np.asarray(rec_idx, dtype=float)
    times[-1] = t1
    return Trajectory(times=times, states=np.asarray(rec_states))


def propagator_matrix(system, t0: float, t1: float, n_steps: int) -> np.ndarray:
    """Full midpoint-rule propagator U(t1 <- t0) as a dense unitary."""
    if not t1 > t0:
        raise ValueError("t1 must exceed t0")
    dt = (t1 - t0) / n_steps
    if isinstance(system, TlsSchedule):
        mids = t0 + (np.arange(n_steps) + 0.5) * dt
        us = _batch_unitaries_2x2(system.coefficients(mids), dt)
        u = np.eye(2, dtype=complex)
        for k in range(n_steps):
            u = us[k] @ u
        return u
    probe = _midpoint_matrices(system, np.array([t0 + 0.5 * dt]))[0]
    dim = probe.shape[0]
    u = np.eye(dim, dtype=complex)
    chunk = max(1, _EIGH_CHUNK_ENTRIES // (dim * dim))
    k = 0
    while k < n_steps:
        m = min(chunk, n_steps - k)
        mids = t0 + (np.arange(k, k + m) + 0.5) * dt
        hs = _midpoint_matrices(system, mids)
        evals, evecs = np.linalg.eigh(hs)
        phases = np.exp(-1j * evals * dt)
        for j in range(m):
            v = evecs[j]
            u = v @ (phases[j][:, None] * (v.conj().T @ u))
        k += m
    return u


def evolve_converged(system, psi0, t0: float, t1: float, tol: float,
                     n_start: int = 1,
                     step_ceiling: int = DEFAULT_STEP_CEILING):
    """Refine the whole-run step count until the final state is stable.

    Doubles n_steps until the Euclidean distance between successive
    final states drops below tol; raises ConvergenceError at the step
    ceiling (default 2**24).

    Returns
    -------
    (state, n_steps_used)
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = max(1, int(n_start))
    prev = evolve(system, psi0, t0, t1, n, max_samples=2).final_state
    while n <= step_ceiling:
        n *= 2
        cur = evolve(system, psi0, t0, t1, n, max_samples=2).final_state
        if np.linalg.norm(cur - prev) < tol:
            return cur, n
        prev = cur
    raise ConvergenceError(
        f"no convergence to tol={tol} within {step_ceiling} steps")
