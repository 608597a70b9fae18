"""Transfer-matrix pipeline: stage detection, R/T extraction, prediction.

The protocol splits into a non-adiabatic stage I over [0, t_f], an
adiabatic stage II over (t_f, T - t_f) where only the dynamical phase
accumulates, and the mirror image stage III.  Reflection and
transmission amplitudes taken at the stage-I endpoint, combined with the
three phases (dynamical, half-time gauge, relative), predict the final
ground-state probability, which the pipeline also measures directly
from the full numerical evolution.
"""
from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .adiabatic import (EigenFrame, OccupationSeries, dynamical_phase,
                        eigenframe, occupation_series, phi_c)
from .errors import (InvalidStateError, SymmetryError,
                     TransitionDetectionError)
from .pauli import SymmetryAxis, principal_angle
from .propagator import default_tls_steps, evolve, propagator_matrix
from .schedules import Hold, TlsSchedule, check_symmetry

SYMMETRY_RESIDUAL_TOL = 1e-9
DIP_DEPTH_THRESHOLD = 1e-6
# the transition counts as finished once |dP| has fallen back below this
# fraction of the dip magnitude
PLATEAU_FRACTION = 1e-3


@dataclass(frozen=True)
class StageDecomposition:
    """Stage boundaries: [t_i, t_f], (t_f, T - t_f), [T - t_f, T]."""

    t_f: float
    total_time: float
    t_i: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.t_i < self.t_f <= self.total_time / 2.0 + 1e-12:
            raise ValueError("stage boundaries must satisfy 0 <= t_i < t_f <= T/2")

    @property
    def stage_ii(self) -> tuple[float, float]:
        return self.t_f, self.total_time - self.t_f


@dataclass
class InterferenceReport:
    """Extracted amplitudes, phases and both probability routes."""

    t_f: float
    R: complex
    T: complex
    phi_d: float
    phi_c: float
    phi_r: float
    phi_L: float
    p_mm_tm: float
    p_mp_tm: float
    p_mm_num: float
    p_mp_num: float
    param: Optional[float] = None


class Prediction(NamedTuple):
    p_mm: float
    p_mp: float
    phi_L: float
    phi_r: float


def detect_t_f(occ: OccupationSeries, total_time: Optional[float] = None,
               hold: Optional[Hold] = None) -> float:
    """Stage-I endpoint from the occupation derivative.

    Locates the first dip of dP_minus (first sample where its discrete
    derivative changes sign from negative to positive) with depth above
    1e-6, then returns the time at which |dP_minus| has decayed back
    below a small fraction of the dip magnitude: the point where the
    transition region has closed and the plateau begins.  Schedules with
    a hold segment bypass detection; their stage-I endpoint is the hold
    start.
    """
    if hold is not None:
        return float(hold.start)
    ts = occ.times
    dp = occ.dp_minus
    total = float(total_time) if total_time is not None else float(ts[-1])
    half = total / 2.0
    k_half = int(np.searchsorted(ts, half + 1e-12))
    k_dip = None
    for k in range(1, min(k_half, len(ts) - 1)):
        if (dp[k] - dp[k - 1]) < 0 and (dp[k + 1] - dp[k]) > 0 \
                and dp[k] < -DIP_DEPTH_THRESHOLD:
            k_dip = k
            break
    if k_dip is None:
        raise TransitionDetectionError(
            "no transition dip found in dP_minus over [0, T/2]")
    threshold = PLATEAU_FRACTION * abs(dp[k_dip])
    stop = min(k_half, len(ts) - 1)
    for k in range(k_dip + 1, stop + 1):
        if abs(dp[k]) < threshold:
            return float(ts[k])
    k_best = k_dip + 1 + int(np.argmin(np.abs(dp[k_dip + 1:stop + 1])))
    return float(ts[k_best])


def extract_RT(psi: np.ndarray, frame: EigenFrame) -> tuple[complex, complex]:
    """Reflection/transmission amplitudes of the state in the fixed gauge.

    R = <v_minus|psi>, T = <v_plus|psi>; requires psi to be normalized so
    that |R|^2 + |T|^2 = 1 up to integrator tolerance.
    """
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > 1e-6:
        raise InvalidStateError(f"state norm {nrm} deviates from 1 beyond 1e-6")
    return complex(np.vdot(frame.v_minus, psi)), complex(np.vdot(frame.v_plus, psi))


def predict(R: complex, T: complex, phi_d: float, phi_c_value: float) -> Prediction:
    """Interference probabilities from amplitudes and phases.

    phi_r = arg(R T*), phi_L = phi_d + 2 phi_c + phi_r,
    P_mp = 4|R|^2|T|^2 cos^2(phi_L), P_mm = 1 - P_mp.  A transmission
    amplitude of exactly zero leaves phi_r undefined (returned as NaN)
    with P_mp = 0.
    """
    r2 = abs(R) ** 2
    t2 = abs(T) ** 2
    if abs(r2 + t2 - 1.0) > 1e-6:
        raise InvalidStateError("|R|^2 + |T|^2 deviates from 1 beyond 1e-6")
    if T == 0:
        return Prediction(p_mm=1.0, p_mp=0.0, phi_L=float("nan"),
                          phi_r=float("nan"))
    phi_r = principal_angle(R * np.conj(T))
    phi_L = phi_d + 2.0 * phi_c_value + phi_r
    p_mp = float(4.0 * r2 * t2 * np.cos(phi_L) ** 2)
    return Prediction(p_mm=1.0 - p_mp, p_mp=p_mp, phi_L=phi_L, phi_r=phi_r)


def _diag_phase(gamma: float) -> np.ndarray:
    return np.diag([np.exp(-1j * gamma), np.exp(1j * gamma)])


def transfer_matrices(R: complex, T: complex, phi_d: float, phi_c_value: float,
                      gamma_i: float = 0.0, gamma_f: float = 0.0):
    """Stage matrices and their product in the gauge-stripped form.

    U_I  = [[R e^{i phi_c}, -T* e^{i phi_c}], [T e^{-i phi_c}, R* e^{-i phi_c}]]
    U_II = diag(e^{i phi_d}, e^{-i phi_d})
    U_III= [[R e^{i phi_c}, -T e^{-i phi_c}], [T* e^{i phi_c}, R* e^{-i phi_c}]]

    Optional transport phases gamma_i, gamma_f dress the stage matrices
    with diagonal phase factors; they drop out of every |entry| of the
    product, which is returned as U_total = U_III U_II U_I.
    """
    if abs(abs(R) ** 2 + abs(T) ** 2 - 1.0) > 1e-6:
        raise InvalidStateError("|R|^2 + |T|^2 deviates from 1 beyond 1e-6")
    ep = np.exp(1j * phi_c_value)
    em = np.exp(-1j * phi_c_value)
    u_i = np.array([[R * ep, -np.conj(T) * ep],
                    [T * em, np.conj(R) * em]])
    u_ii = np.diag([np.exp(1j * phi_d), np.exp(-1j * phi_d)])
    u_iii = np.array([[R * ep, -T * em],
                      [np.conj(T) * ep, np.conj(R) * em]])
    if gamma_i or gamma_f:
        g_i, g_f = _diag_phase(gamma_i), _diag_phase(gamma_f)
        u_i = g_f @ u_i @ np.linalg.inv(g_i)
        u_iii = g_i @ u_iii @ np.linalg.inv(g_f)
    return u_i, u_ii, u_iii, u_iii @ u_ii @ u_i


def eigenbasis_stage_matrices(sched: TlsSchedule, axis: SymmetryAxis,
                              t_f: float, n_steps: int):
    """Numerically propagated stage operators in the gauge-fixed frames.

    Returns (U_I, U_III) where U_I spans [0, t_f] and U_III spans
    [T - t_f, T], each expressed between the eigenframes at its
    endpoints (second-half frames generated through sigma_r).
    """
    T = sched.duration
    u_i_bare = propagator_matrix(sched, 0.0, t_f, n_steps)
    u_iii_bare = propagator_matrix(sched, T - t_f, T, n_steps)
    s_0 = eigenframe(sched, 0.0, axis, half="first").basis_matrix()
    s_f = eigenframe(sched, t_f, axis, half="first").basis_matrix()
    s_mf = eigenframe(sched, T - t_f, axis, half="second").basis_matrix()
    s_T = eigenframe(sched, T, axis, half="second").basis_matrix()
    u_i = s_f.conj().T @ u_i_bare @ s_0
    u_iii = s_T.conj().T @ u_iii_bare @ s_mf
    return u_i, u_iii


def analyze(sched: TlsSchedule, axis: SymmetryAxis,
            n_steps: Optional[int] = None) -> InterferenceReport:
    """Full pipeline: evolve, locate t_f, extract amplitudes, predict.

    The schedule must pass the mirror-symmetry check for the given axis.
    Both the transfer-matrix prediction and the directly measured final
    probabilities are reported; the numerical P_mm is the overlap of
    psi(T) with the instantaneous ground state at T.
    """
    residual = check_symmetry(sched, axis, 501)
    if residual > SYMMETRY_RESIDUAL_TOL:
        raise SymmetryError(
            f"symmetry residual {residual:.3e} exceeds {SYMMETRY_RESIDUAL_TOL}")
    T = sched.duration
    n = n_steps if n_steps is not None else default_tls_steps(T)
    psi0 = eigenframe(sched, 0.0, axis).v_minus
    traj = evolve(sched, psi0, 0.0, T, n)
    occ = occupation_series(traj, sched, axis)
    t_f = detect_t_f(occ, total_time=T, hold=sched.hold)
    t_k, psi_k = traj.state_at(t_f)
    StageDecomposition(t_f=t_k, total_time=T)  # range validation only
    frame_f = eigenframe(sched, t_k, axis, half="first")
    R, T_amp = extract_RT(psi_k, frame_f)
    phi_d = dynamical_phase(sched, t_k)
    pc = phi_c(sched, axis)
    pred = predict(R, T_amp, phi_d, pc)
    frame_end = eigenframe(sched, T, axis, half="second")
    psi_T = traj.final_state
    p_mm_num = float(abs(np.vdot(frame_end.v_minus, psi_T)) ** 2)
    p_mp_num = float(abs(np.vdot(frame_end.v_plus, psi_T)) ** 2)
    return InterferenceReport(
        t_f=t_k, R=R, T=T_amp, phi_d=phi_d, phi_c=pc, phi_r=pred.phi_r,
        phi_L=pred.phi_L, p_mm_tm=pred.p_mm, p_mp_tm=pred.p_mp,
        p_mm_num=p_mm_num, p_mp_num=p_mp_num)


@dataclass
class SweepRow:
    """One sweep point; holds either a report or the failure message."""

    value: float
    report: Optional[InterferenceReport] = None
    error: Optional[str] = None


def _sweep_worker(args) -> SweepRow:
    make_schedule, value, axis, n_steps = args
    try:
        report = analyze(make_schedule(value), axis, n_steps)
        report.param = float(value)
        return SweepRow(value=float(value), report=report)
    except Exception as exc:  # per-row failures must not kill the sweep
        return SweepRow(value=float(value), error=f"{type(exc).__name__}: {exc}")


def sweep(make_schedule: Callable[[float], TlsSchedule],
          values: Sequence[float], axis: SymmetryAxis,
          n_steps: Optional[int] = None, workers: int = 1) -> list[SweepRow]:
    """One analyze() per parameter value, in input order.

    Rows run independently (optionally in worker processes); individual
    failures are recorded on their row and the sweep continues.
    """
    values = list(values)
    if not values:
        raise ValueError("sweep requires a nonempty value list")
    jobs = [(make_schedule, v, axis, n_steps) for v in values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_worker, jobs))
    return [_sweep_worker(job) for job in jobs]


SWEEP_CSV_HEADER = ["param", "t_f", "abs_R2", "abs_T2", "phi_d", "phi_c",
                    "phi_r", "phi_L", "P_mm_tm", "P_mm_num"]


def format_float(x: float) -> str:
    return f"{float(x):.12g}"


def write_sweep_csv(rows: Sequence[SweepRow], path) -> None:
    """Serialize sweep rows with the fixed header and 12-digit floats."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_CSV_HEADER)
        for row in rows:
            if row.report is None:
                data = [row.value] + [float("nan")] * 9
            else:
                r = row.report
                data = [row.value, r.t_f, abs(r.R) ** 2, abs(r.T) ** 2,
                        r.phi_d, r.phi_c, r.phi_r, r.phi_L,
                        r.p_mm_tm, r.p_mm_num]
            writer.writerow([format_float(x) for x in data])
