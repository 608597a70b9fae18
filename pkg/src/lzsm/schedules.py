"""Time-dependent Hamiltonian coefficient schedules and symmetry checks.

A schedule evaluates four real coefficient functions on demand (closed
form, not pre-sampled), either in the Cartesian Pauli frame (d0, dx, dy,
dz) or in the rotated frame (d0, d_theta, d_phi, d_r) attached to a
symmetry axis.  An optional hold segment freezes the coefficients at
their values at the segment start; the hold is encoded structurally by
remapping protocol time onto a shorter nominal timeline, never by
mutating the coefficient functions.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import partial
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ScheduleDomainError
from .pauli import HermitianOperator2, SymmetryAxis, frame_basis_matrix, pauli_axis

_DOMAIN_EPS = 1e-9

CoeffFunc = Callable[[np.ndarray], np.ndarray]


def _int_power(x, p: int):
    """x**p by binary exponentiation; exact sign handling for odd p."""
    if p < 0:
        raise ValueError("negative power")
    result = np.ones_like(x)
    base = np.array(x, copy=True)
    while p:
        if p & 1:
            result = result * base
        base = base * base
        p >>= 1
    return result


# Module-level coefficient primitives so that schedules built from them
# stay picklable for process-based sweeps.

def zero_coeff(u):
    return np.zeros_like(np.asarray(u, dtype=float))


def cosine_power(u, amplitude: float, period: float, power: int = 1):
    return amplitude * _int_power(np.cos(np.pi * np.asarray(u, dtype=float) / period), power)


def sine_power(u, amplitude: float, period: float, power: int = 1):
    return amplitude * _int_power(np.sin(np.pi * np.asarray(u, dtype=float) / period), power)


def linear_interp(u, times, values):
    return np.interp(np.asarray(u, dtype=float), times, values)


@dataclass(frozen=True)
class Hold:
    """Segment [start, start + duration] during which coefficients freeze."""

    start: float
    duration: float

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("hold duration must be >= 0")
        if self.start < 0:
            raise ValueError("hold start must be >= 0")


@dataclass(frozen=True)
class TlsSchedule:
    """Coefficient schedule for a driven two-level system over [0, T].

    Parameters
    ----------
    duration : float
        Total protocol time T, hold included.
    funcs : tuple of callables
        Four coefficient functions of nominal time, ordered
        (d0, dx, dy, dz) for frame="cartesian" or
        (d0, d_theta, d_phi, d_r) for frame="rotated".
    frame : str
        "cartesian" or "rotated".
    axis : SymmetryAxis, optional
        Required for rotated-frame schedules.
    hold : Hold, optional
        Centered hold segment; start must equal (T - duration)/2.
    """

    duration: float
    funcs: tuple[CoeffFunc, CoeffFunc, CoeffFunc, CoeffFunc]
    frame: str = "cartesian"
    axis: Optional[SymmetryAxis] = None
    hold: Optional[Hold] = None

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("schedule duration must be positive")
        if self.frame not in ("cartesian", "rotated"):
            raise ValueError(f"unknown frame {self.frame!r}")
        if self.frame == "rotated" and self.axis is None:
            raise ValueError("rotated-frame schedule requires an axis")
        if len(self.funcs) != 4:
            raise ValueError("exactly four coefficient functions required")
        if self.hold is not None:
            centered = (self.duration - self.hold.duration) / 2.0
            if abs(self.hold.start - centered) > 1e-9 * max(1.0, self.duration):
                raise ValueError("hold segment must be centered: start = (T - tau)/2")

    # -- time handling -------------------------------------------------

    def _nominal_time(self, t: np.ndarray) -> np.ndarray:
        if self.hold is None or self.hold.duration == 0.0:
            return t
        a = self.hold.start
        b = a + self.hold.duration
        return np.where(t <= a, t, np.where(t <= b, a, t - self.hold.duration))

    def _check_domain(self, t: np.ndarray) -> np.ndarray:
        slack = _DOMAIN_EPS * max(1.0, self.duration)
        if np.any(t < -slack) or np.any(t > self.duration + slack):
            raise ScheduleDomainError(
                f"time outside schedule domain [0, {self.duration}]")
        return np.clip(t, 0.0, self.duration)

    # -- evaluation ----------------------------------------------------

    def raw_coefficients(self, t):
        """Coefficients in the schedule's own frame; shape (4,) or (4, n)."""
        t_arr = np.asarray(t, dtype=float)
        scalar = t_arr.ndim == 0
        t_arr = self._check_domain(np.atleast_1d(t_arr))
        u = self._nominal_time(t_arr)
        rows = np.vstack([np.broadcast_to(np.asarray(f(u), dtype=float), u.shape)
                          for f in self.funcs])
        return rows[:, 0] if scalar else rows

    def coefficients(self, t):
        """Cartesian Pauli coefficients (d0, dx, dy, dz); shape (4,) or (4, n)."""
        rows = self.raw_coefficients(t)
        if self.frame == "cartesian":
            return rows
        basis = frame_basis_matrix(self.axis)  # rows: theta, phi, r
        out = np.empty_like(rows)
        out[0] = rows[0]
        out[1:] = basis.T @ rows[1:]
        return out

    def hamiltonian(self, t: float) -> HermitianOperator2:
        d0, dx, dy, dz = (float(c) for c in self.coefficients(float(t)))
        return HermitianOperator2(d0, dx, dy, dz)

    def energies(self, t):
        """(E_minus, E_plus) arrays for the instantaneous spectrum."""
        c = self.coefficients(t)
        r = np.sqrt(c[1] ** 2 + c[2] ** 2 + c[3] ** 2)
        return c[0] - r, c[0] + r


def hamiltonian_at(sched: TlsSchedule, t: float) -> HermitianOperator2:
    """Instantaneous Hamiltonian of the schedule, in units of J."""
    return sched.hamiltonian(t)


def rotated_coefficients(sched: TlsSchedule, axis: SymmetryAxis, t):
    """Coefficients of the schedule projected on the (theta, phi, r) frame."""
    cart = sched.coefficients(t)
    basis = frame_basis_matrix(axis)
    out = np.empty_like(cart)
    out[0] = cart[0]
    out[1:] = basis @ cart[1:]
    return out


# -- built-in schedules ------------------------------------------------

def example1_schedule(J0: float, Jx: float, Jy: float, Jz: float,
                      T: float) -> TlsSchedule:
    """Two-sharp-minima drive: d0 = J0 cos(pi t/T), dx = Jx sin^2,
    dy = Jy sin^2, dz = Jz cos^21.  Mirror-symmetric about T/2 for the
    z-axis operator."""
    if T <= 0:
        raise ValueError("T must be positive")
    funcs = (
        partial(cosine_power, amplitude=J0, period=T, power=1),
        partial(sine_power, amplitude=Jx, period=T, power=2),
        partial(sine_power, amplitude=Jy, period=T, power=2),
        partial(cosine_power, amplitude=Jz, period=T, power=21),
    )
    return TlsSchedule(duration=T, funcs=funcs, frame="cartesian",
                       axis=SymmetryAxis(0.0, 0.0))


def example2_schedule(J_theta: float, J_r: float, J_phi: float, T0: float,
                      tau: float, axis: SymmetryAxis) -> TlsSchedule:
    """Rotated-frame sweep of duration T0 with a centered hold of length tau.

    On the nominal timeline the coefficients are d_theta = J_theta sin(pi
    u/T0), d_phi = J_phi sin(pi u/T0), d_r = J_r cos(pi u/T0); during the
    hold they stay frozen at their u = T0/2 values (d_r = 0).  The total
    protocol time is T0 + tau.
    """
    if T0 <= 0:
        raise ValueError("T0 must be positive")
    if tau < 0:
        raise ValueError("tau must be >= 0")
    funcs = (
        zero_coeff,
        partial(sine_power, amplitude=J_theta, period=T0, power=1),
        partial(sine_power, amplitude=J_phi, period=T0, power=1),
        partial(cosine_power, amplitude=J_r, period=T0, power=1),
    )
    return TlsSchedule(duration=T0 + tau, funcs=funcs, frame="rotated",
                       axis=axis, hold=Hold(start=T0 / 2.0, duration=tau))


def piecewise_linear_schedule(times: Sequence[float],
                              coeff_samples: Sequence[Sequence[float]],
                              frame: str = "cartesian",
                              axis: Optional[SymmetryAxis] = None,
                              tau: float = 0.0) -> TlsSchedule:
    """Custom schedule from coefficient samples, interpolated linearly.

    `times` spans the nominal timeline; `coeff_samples` holds the four
    coefficient rows sampled at `times`.  A nonzero `tau` inserts a
    centered hold, extending the total time to times[-1] + tau.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) < 2:
        raise ValueError("need at least two sample times")
    if np.any(np.diff(times) <= 0):
        raise ValueError("sample times must be strictly increasing")
    if times[0] != 0.0:
        raise ValueError("sample times must start at 0")
    rows = [np.asarray(r, dtype=float) for r in coeff_samples]
    if len(rows) != 4 or any(r.shape != times.shape for r in rows):
        raise ValueError("coefficient samples must be four rows matching times")
    nominal = float(times[-1])
    funcs = tuple(partial(linear_interp, times=times, values=r) for r in rows)
    hold = Hold(start=nominal / 2.0, duration=tau) if tau > 0 else None
    return TlsSchedule(duration=nominal + tau, funcs=funcs, frame=frame,
                       axis=axis, hold=hold)


def schedule_from_config(config: dict) -> tuple[TlsSchedule, SymmetryAxis]:
    """Build (schedule, axis) from a JSON-style config object.

    Expected fields: {"type": "example1"|"example2"|"custom",
    "params": {...}, "T": number, "tau": number}.  For example2 and
    custom schedules "T" is the nominal sweep duration and "tau" the
    hold length; the total time is T + tau.
    """
    kind = config.get("type")
    params = dict(config.get("params", {}))
    if kind == "example1":
        T = float(config["T"])
        sched = example1_schedule(
            J0=float(params.get("J0", 1.0)), Jx=float(params.get("Jx", 1.5)),
            Jy=float(params.get("Jy", 0.5)), Jz=float(params.get("Jz", 2.0)), T=T)
        return sched, sched.axis
    if kind == "example2":
        axis = SymmetryAxis(theta=float(params.get("theta", np.pi / 3)),
                            phi=float(params.get("phi", np.pi / 6)))
        sched = example2_schedule(
            J_theta=float(params.get("Jtheta", np.sqrt(2) / 2)),
            J_r=float(params.get("Jr", 1.0)),
            J_phi=float(params.get("Jphi", -np.sqrt(2) / 2)),
            T0=float(config["T"]), tau=float(config.get("tau", 0.0)), axis=axis)
        return sched, axis
    if kind == "custom":
        interp = params.get("interpolation")
        if interp != "piecewise-linear":
            raise ValueError(
                "custom schedules must declare interpolation 'piecewise-linear'")
        frame = params.get("frame", "cartesian")
        axis = SymmetryAxis(theta=float(params.get("theta", 0.0)),
                            phi=float(params.get("phi", 0.0)))
        keys = ("d0", "dx", "dy", "dz") if frame == "cartesian" else \
            ("d0", "dtheta", "dphi", "dr")
        rows = [params[k] for k in keys]
        sched = piecewise_linear_schedule(
            params["times"], rows, frame=frame, axis=axis,
            tau=float(config.get("tau", 0.0)))
        return sched, axis
    raise ValueError(f"unknown schedule type {kind!r}")


def check_symmetry(sched: TlsSchedule, axis: SymmetryAxis,
                   n_samples: int = 1001) -> float:
    """Max Frobenius norm of H(t) + sigma_r H(T-t) sigma_r over a grid.

    Zero (up to rounding) exactly when the schedule obeys the mirror
    constraint for the given axis.
    """
    if n_samples < 2:
        raise ValueError("need at least two samples")
    T = sched.duration
    ts = np.linspace(0.0, T, n_samples)
    sr = pauli_axis(axis).matrix()
    c_fwd = sched.coefficients(ts)
    c_rev = sched.coefficients(T - ts)
    worst = 0.0
    for k in range(n_samples):
        h_fwd = HermitianOperator2(*c_fwd[:, k]).matrix()
        h_rev = HermitianOperator2(*c_rev[:, k]).matrix()
        res = h_fwd + sr @ h_rev @ sr
        worst = max(worst, float(np.linalg.norm(res)))
    return worst
