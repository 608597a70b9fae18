"""Built-in verification suites exposed through the command line.

Each suite runs a set of invariant checks and reports them in a
machine-readable form: one record per assertion with the measured
value, the threshold and the comparison direction.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import analysis, ssh
from .adiabatic import eigenframe, gauge_self_connection
from .pauli import SymmetryAxis, pauli_axis
from .propagator import evolve, propagator_matrix, step_unitary_2x2
from .schedules import (TlsSchedule, check_symmetry, example1_schedule,
                        example2_schedule)

PAPER_AXIS_II = SymmetryAxis(theta=np.pi / 3, phi=np.pi / 6)
Z_AXIS = SymmetryAxis(0.0, 0.0)


@dataclass
class Check:
    name: str
    measured: float
    threshold: float
    comparison: str  # "<" or ">"
    passed: bool


def _check(name: str, measured: float, threshold: float,
           comparison: str = "<") -> Check:
    measured = float(measured)
    threshold = float(threshold)
    ok = measured < threshold if comparison == "<" else measured > threshold
    return Check(name=name, measured=measured, threshold=threshold,
                 comparison=comparison, passed=bool(ok))


def _default_example1(T: float = 4.0) -> TlsSchedule:
    return example1_schedule(1.0, 1.5, 0.5, 2.0, T)


def _default_example2(tau: float = 2.0) -> TlsSchedule:
    return example2_schedule(np.sqrt(2) / 2, 1.0, -np.sqrt(2) / 2, 1.26,
                             tau, PAPER_AXIS_II)


def suite_symmetry(sched=None, axis=None) -> list[Check]:
    checks = []
    if sched is not None:
        checks.append(_check("custom schedule residual",
                             check_symmetry(sched, axis), 1e-9))
        return checks
    checks.append(_check("example1 residual (z axis)",
                         check_symmetry(_default_example1(), Z_AXIS), 1e-12))
    checks.append(_check("example2 residual (tilted axis)",
                         check_symmetry(_default_example2(), PAPER_AXIS_II), 1e-12))
    model = ssh.ChainModel(16, 1.0, 0.9, 0.1, 170.0)
    checks.append(_check("reduced SSH residual (z axis)",
                         check_symmetry(ssh.reduced_schedule(model), Z_AXIS), 1e-12))
    checks.append(_check("example1 vs x axis residual (negative control)",
                         check_symmetry(_default_example1(),
                                        SymmetryAxis(np.pi / 2, 0.0)),
                         1e-3, comparison=">"))
    return checks


def suite_unitarity(sched=None, axis=None) -> list[Check]:
    sched = sched if sched is not None else _default_example1()
    axis = axis if axis is not None else Z_AXIS
    checks = []
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(50):
        c = rng.normal(size=4) * 3.0
        dt = rng.uniform(1e-4, 0.5)
        from .pauli import HermitianOperator2
        u = step_unitary_2x2(HermitianOperator2(*c), dt)
        worst = max(worst, np.linalg.norm(u.conj().T @ u - np.eye(2)))
    checks.append(_check("step unitary ||U+U - I||", worst, 1e-12))

    psi0 = eigenframe(sched, 0.0, axis).v_minus
    T = sched.duration
    traj = evolve(sched, psi0, 0.0, T, 10_000)
    norms = np.linalg.norm(traj.states, axis=1)
    checks.append(_check("trajectory norm drift", float(np.max(np.abs(norms - 1.0))), 1e-9))

    n1, n2 = 4000, 6000
    t_mid = T * n1 / (n1 + n2)
    traj_a = evolve(sched, psi0, 0.0, t_mid, n1)
    traj_b = evolve(sched, traj_a.final_state, t_mid, T, n2)
    single = evolve(sched, psi0, 0.0, T, n1 + n2)
    checks.append(_check("composition error",
                         float(np.linalg.norm(traj_b.final_state - single.final_state)),
                         1e-12))

    f1 = evolve(sched, psi0, 0.0, T, 2000).final_state
    f2 = evolve(sched, psi0, 0.0, T, 4000).final_state
    f4 = evolve(sched, psi0, 0.0, T, 8000).final_state
    ratio = np.linalg.norm(f1 - f2) / np.linalg.norm(f2 - f4)
    checks.append(_check("step-doubling error ratio (order >= 2)", float(ratio),
                         3.0, comparison=">"))

    sr = pauli_axis(axis).matrix()
    t_f = 0.27 * T
    u_i = propagator_matrix(sched, 0.0, t_f, 20_000)
    u_iii = propagator_matrix(sched, T - t_f, T, 20_000)
    rel = np.linalg.norm(u_i - sr @ np.linalg.inv(u_iii) @ sr)
    checks.append(_check("stage relation U_I = s_r U_III^-1 s_r", float(rel), 1e-6))
    return checks


def suite_gauge(sched=None, axis=None) -> list[Check]:
    cases = [("example1", _default_example1(), Z_AXIS),
             ("example2", _default_example2(), PAPER_AXIS_II)]
    if sched is not None:
        cases = [("custom", sched, axis)]
    checks = []
    for label, s, ax in cases:
        T = s.duration
        ts = np.linspace(T / 200.0, T, 101)
        eig_res = det_res = imq_res = anti_res = 0.0
        for t in ts:
            fr = eigenframe(s, t, ax)
            h = s.hamiltonian(t).matrix()
            eig_res = max(eig_res,
                          np.linalg.norm(h @ fr.v_minus - fr.e_minus * fr.v_minus),
                          np.linalg.norm(h @ fr.v_plus - fr.e_plus * fr.v_plus))
            det_res = max(det_res, abs(np.linalg.det(fr.basis_matrix()) - 1.0))
            q = np.conj(fr.v_plus[0]) * fr.v_minus[0]
            if t <= T / 2:
                imq_res = max(imq_res, abs(np.imag(q)))
            # both sides from direct eigendecompositions, so the mirror
            # property is a real statement about the schedule
            here = eigenframe(s, t, ax, half="first")
            mirror = eigenframe(s, T - t, ax, half="first")
            anti_res = max(anti_res, abs(here.e_minus + mirror.e_plus),
                           abs(here.e_plus + mirror.e_minus))
        checks.append(_check(f"{label} eigen residual", eig_res, 1e-10))
        checks.append(_check(f"{label} det[v-, v+] - 1", det_res, 1e-10))
        checks.append(_check(f"{label} Im<v+|0><0|v-> (first half)", imq_res, 1e-10))
        checks.append(_check(f"{label} spectrum antisymmetry", anti_res, 1e-10))
        conn_a = gauge_self_connection(s, ax, 2000)
        conn_b = gauge_self_connection(s, ax, 4000)
        checks.append(_check(f"{label} transport connection decay factor",
                             float(conn_a / conn_b), 2.0, comparison=">"))
    return checks


def suite_tm_agreement(sched=None, axis=None) -> list[Check]:
    from functools import partial

    del sched, axis
    values = np.linspace(0.5, 10.0, 50)
    rows = analysis.sweep(partial(example1_schedule, 1.0, 1.5, 0.5, 2.0),
                          values, Z_AXIS)
    diffs = np.array([r.report.p_mm_tm - r.report.p_mm_num for r in rows
                      if r.report is not None])
    checks = [_check("rows analyzed", float(len(diffs)), float(len(values)) - 0.5,
                     comparison=">"),
              _check("RMS |P_mm_tm - P_mm_num| over T sweep",
                     float(np.sqrt(np.mean(diffs ** 2))), 0.02)]
    # closed-form extrema: cos(phi_L) = 0 forces the prediction to one
    pred = analysis.predict(np.sqrt(0.3), np.sqrt(0.7) * 1j, np.pi / 2, 0.0)
    shift = (np.pi / 2 - pred.phi_L) % np.pi
    pred2 = analysis.predict(np.sqrt(0.3), np.sqrt(0.7) * 1j,
                             np.pi / 2 + shift, 0.0)
    checks.append(_check("P_mm at cos(phi_L) = 0", abs(pred2.p_mm - 1.0), 1e-12))
    return checks


def suite_ssh_reduction(sched=None, axis=None) -> list[Check]:
    del sched, axis
    model = ssh.ChainModel(16, 1.0, 0.9, 0.1, 170.0)
    T = model.total_time
    ts = np.linspace(0.0, T, 100)
    worst_d = worst_k = 0.0
    for t in ts:
        d_tilde, k_tilde = ssh.reduced_coefficients(model, t)
        pair = ssh.edge_states(float(model.eta(t)), model.n_cells)
        h = model.matrix(float(t))
        worst_d = max(worst_d, abs(d_tilde - pair.left @ h @ pair.left))
        worst_k = max(worst_k, abs(k_tilde - pair.left @ h @ pair.right))
    checks = [_check("Delta_tilde vs <L|H|L>", worst_d, 1e-10),
              _check("kappa_tilde vs <L|H|R>", worst_k, 1e-10)]

    d_fwd, k_fwd = ssh.reduced_coefficients(model, ts)
    d_rev, k_rev = ssh.reduced_coefficients(model, T - ts)
    checks.append(_check("Delta_tilde parity", float(np.max(np.abs(d_fwd + d_rev))), 1e-10))
    checks.append(_check("kappa_tilde parity", float(np.max(np.abs(k_fwd - k_rev))), 1e-10))

    sched_r = ssh.reduced_schedule(model)
    h_end = sched_r.hamiltonian(T).matrix()
    evals, evecs = np.linalg.eigh(h_end)
    right_basis = np.array([0.0, 1.0])
    checks.append(_check("ground of H_R(T) equals |R>",
                         1.0 - abs(np.vdot(evecs[:, 0], right_basis)) ** 2, 1e-10))

    # mid-gap eigenvectors carry bulk dressing of weight ~ eta^{2N}/2, so
    # the fidelity floor against the geometric edge pair scales with it
    eta_half = float(model.eta(T / 2.0))
    floor = 1.0 - abs(eta_half) ** (2 * model.n_cells)
    checks.append(_check(
        f"mid-gap edge-state fidelity at T/2 (floor 1 - eta^2N = {floor:.4f})",
        _edge_fidelity(model), floor, comparison=">"))
    return checks


def _edge_fidelity(model: ssh.ChainModel) -> float:
    """Worst per-state overlap of the mid-gap eigenvectors with the
    symmetric/antisymmetric edge-state combinations at T/2."""
    h_half = model.matrix(model.total_time / 2.0)
    _, evecs = np.linalg.eigh(h_half)
    pair = ssh.edge_states(float(model.eta(model.total_time / 2.0)),
                           model.n_cells)
    sym = (pair.left + pair.right) / np.sqrt(2.0)
    anti = (pair.left - pair.right) / np.sqrt(2.0)
    lo = evecs[:, model.n_cells - 1]
    hi = evecs[:, model.n_cells]
    direct = min(abs(lo @ sym) ** 2, abs(hi @ anti) ** 2)
    swapped = min(abs(lo @ anti) ** 2, abs(hi @ sym) ** 2)
    return float(max(direct, swapped))


SUITES = {
    "symmetry": suite_symmetry,
    "unitarity": suite_unitarity,
    "gauge": suite_gauge,
    "tm-agreement": suite_tm_agreement,
    "ssh-reduction": suite_ssh_reduction,
}


def run_suite(name: str, sched=None, axis=None) -> dict:
    """Execute one suite; returns the machine-readable report dict."""
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    checks = SUITES[name](sched=sched, axis=axis)
    return {
        "suite": name,
        "passed": all(c.passed for c in checks),
        "checks": [asdict(c) for c in checks],
    }
