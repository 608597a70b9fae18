"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
summary lines.  Two sub-assertions are marked xfail(strict): they assert
targets that the configured drives mathematically cannot reach, and each
marker carries the measured value and the reason.
"""
import csv
from functools import partial
from pathlib import Path

import numpy as np
import pytest

from lzsm.analysis import analyze, eigenbasis_stage_matrices, sweep
from lzsm.adiabatic import eigenframe
from lzsm.pauli import SIGMA_X, HermitianOperator2, SymmetryAxis, pauli_axis
from lzsm.propagator import evolve, propagator_matrix, step_unitary_2x2
from lzsm.schedules import example1_schedule, example2_schedule
from lzsm.ssh import (ChainModel, reduced_pmm_numeric, reduced_schedule,
                      spectrum_vs_time, transport_probability, qsl_time)

Z_AXIS = SymmetryAxis(0.0, 0.0)
AXIS_II = SymmetryAxis(np.pi / 3, np.pi / 6)
SQ2 = np.sqrt(2) / 2
DATA_DIR = Path(__file__).parent / "data"


def _line(tag: str, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {tag}: {'PASS' if ok else 'FAIL'} - {detail}")


def ex1(T):
    return example1_schedule(1.0, 1.5, 0.5, 2.0, T)


def ex2(tau, T0=1.26):
    return example2_schedule(SQ2, 1.0, -SQ2, T0, tau, AXIS_II)


def _refined_extrema(xs, ys, kind="max"):
    """Three-point parabola refinement of grid extrema; [(x*, y*), ...].

    Assumes a uniform grid; falls back to the grid sample where the
    parabola degenerates.
    """
    out = []
    sign = 1.0 if kind == "max" else -1.0
    for k in range(1, len(xs) - 1):
        if sign * ys[k] > sign * ys[k - 1] and sign * ys[k] > sign * ys[k + 1]:
            h = xs[k + 1] - xs[k]
            denom = ys[k - 1] - 2.0 * ys[k] + ys[k + 1]
            if denom == 0:
                out.append((float(xs[k]), float(ys[k])))
                continue
            diff = ys[k - 1] - ys[k + 1]
            x_star = xs[k] + 0.5 * h * diff / denom
            y_star = ys[k] - diff * diff / (8.0 * denom)
            out.append((float(x_star), float(y_star)))
    return out


# ---------------------------------------------------------------- 1

def test_criterion_1_diabatic_splitting():
    report = analyze(ex1(0.05), Z_AXIS)
    r2, t2 = abs(report.R) ** 2, abs(report.T) ** 2
    ok = (abs(r2 - 0.5) <= 0.02 and abs(t2 - 0.5) <= 0.02
          and report.p_mm_num < 0.02 and report.p_mm_tm < 0.02)
    _line("1 (diabatic splitting)", ok,
          f"|R|^2={r2:.4f} |T|^2={t2:.4f} "
          f"P_mm_num={report.p_mm_num:.4f} P_mm_tm={report.p_mm_tm:.4f}")
    assert abs(r2 - 0.5) <= 0.02
    assert abs(t2 - 0.5) <= 0.02
    assert report.p_mm_num < 0.02
    assert report.p_mm_tm < 0.02


# ---------------------------------------------------------------- 2

@pytest.fixture(scope="module")
def example1_sweep_rows():
    values = np.linspace(0.5, 10.0, 50)
    return sweep(partial(example1_schedule, 1.0, 1.5, 0.5, 2.0),
                 values, Z_AXIS)


def test_criterion_2_interference_agreement(example1_sweep_rows):
    rows = example1_sweep_rows
    assert all(r.report is not None for r in rows)
    params = np.array([r.value for r in rows])
    p_num = np.array([r.report.p_mm_num for r in rows])
    p_tm = np.array([r.report.p_mm_tm for r in rows])
    maxima = _refined_extrema(params, p_num, "max")
    rms = float(np.sqrt(np.mean((p_tm - p_num) ** 2)))
    worst_peak = min((y for _, y in maxima), default=0.0)
    ok = len(maxima) >= 2 and abs(worst_peak - 1) <= 1e-2 and rms < 0.02
    _line("2 (interference agreement)", ok,
          f"{len(maxima)} maxima, lowest peak {worst_peak:.4f}, RMS={rms:.2e}")
    assert len(maxima) >= 2, "expected an oscillating pattern"
    for _, y in maxima:
        assert abs(y - 1.0) <= 1e-2
    assert rms < 0.02


# ---------------------------------------------------------------- 3

def test_criterion_3_qualitative_endpoints():
    p2 = analyze(ex1(2.0), Z_AXIS).p_mm_num
    p8 = analyze(ex1(8.0), Z_AXIS).p_mm_num
    ok = p2 > 0.95 and p8 < 0.1
    _line("3 (endpoint behavior)", ok, f"P_mm(T=2)={p2:.4f} P_mm(T=8)={p8:.4f}")
    assert p2 > 0.95
    assert p8 < 0.1


# ---------------------------------------------------------------- 4

@pytest.fixture(scope="module")
def example2_report():
    return analyze(ex2(tau=2.0), AXIS_II)


def test_criterion_4_flat_bands_and_phases(example2_report):
    sched = ex2(tau=2.0)
    ts = np.linspace(0.0, sched.duration, 513)
    lo, hi = sched.energies(ts)
    band_dev = max(np.max(np.abs(lo + 1.0)), np.max(np.abs(hi - 1.0)))
    two_pc = 2 * example2_report.phi_c / np.pi
    phi_r = example2_report.phi_r / np.pi
    ok = (band_dev < 1e-10 and abs(two_pc - 0.282) <= 0.002
          and abs(phi_r - 0.966) <= 0.01)
    _line("4 (flat bands and phases)", ok,
          f"band dev={band_dev:.1e} 2phi_c={two_pc:.4f}pi phi_r={phi_r:.4f}pi")
    assert band_dev < 1e-10
    assert two_pc == pytest.approx(0.282, abs=0.002)
    assert phi_r == pytest.approx(0.966, abs=0.01)


@pytest.mark.xfail(strict=True, reason=(
    "target 4|R|^2|T|^2 > 0.99 at T0 = 1.26: the flat-band stage-I problem "
    "is exactly solvable (constant-magnitude rotating field) and gives "
    "|R|^2 = 0.5654, hence 4|R|^2|T|^2 = 0.9829, confirmed independently "
    "by an adaptive integrator at rtol 1e-11"))
def test_criterion_4_splitting_product(example2_report):
    prod = 4 * abs(example2_report.R) ** 2 * abs(example2_report.T) ** 2
    _line("4b (splitting product)", prod > 0.99,
          f"4|R|^2|T|^2={prod:.4f} (target > 0.99)")
    assert prod > 0.99


# ---------------------------------------------------------------- 5

@pytest.fixture(scope="module")
def example2_tau_sweep():
    values = np.linspace(0.0, 3 * np.pi, 121)
    return sweep(partial(_ex2_family), values, AXIS_II)


def _ex2_family(tau):
    return example2_schedule(SQ2, 1.0, -SQ2, 1.26, tau, AXIS_II)


def test_criterion_5_periodicity(example2_tau_sweep):
    rows = example2_tau_sweep
    taus = np.array([r.value for r in rows])
    p_num = np.array([r.report.p_mm_num for r in rows])
    maxima = _refined_extrema(taus, p_num, "max")
    spacings = np.diff([x for x, _ in maxima])
    period_err = float(np.max(np.abs(spacings - np.pi))) / np.pi
    top = max(y for _, y in maxima)
    ok = len(maxima) >= 2 and period_err <= 0.01 and top >= 1 - 1e-3
    _line("5 (periodicity)", ok,
          f"{len(maxima)} maxima, period error {period_err:.4f}pi, "
          f"top={top:.6f}")
    assert len(maxima) >= 2
    assert period_err <= 0.01
    assert top >= 1 - 1e-3


@pytest.mark.xfail(strict=True, reason=(
    "target min P_mm <= 1e-3 over the tau sweep: the oscillation floor is "
    "1 - 4|R|^2|T|^2 = 0.0171 at T0 = 1.26 because the stage-I splitting "
    "is not exactly even at this sweep duration"))
def test_criterion_5_range_floor(example2_tau_sweep):
    rows = example2_tau_sweep
    taus = np.array([r.value for r in rows])
    p_num = np.array([r.report.p_mm_num for r in rows])
    minima = _refined_extrema(taus, p_num, "min")
    floor = min(y for _, y in minima)
    _line("5b (range floor)", floor <= 1e-3,
          f"min P_mm={floor:.4f} (target <= 1e-3)")
    assert floor <= 1e-3


# ---------------------------------------------------------------- 6

def test_criterion_6_ssh_transport_peaks():
    # chain: first local maximum of P_2N, parabolic refinement
    Ts = np.arange(155.0, 186.0, 1.5)
    ps = [transport_probability(ChainModel(16, 1.0, 0.9, 0.1, float(T)))
          for T in Ts]
    peaks = _refined_extrema(Ts, np.array(ps), "max")
    assert peaks, "no transport peak found in the scan window"
    t_peak, p_peak = peaks[0]
    ok_chain = 165.0 <= t_peak <= 175.0 and p_peak > 0.99

    # reduced model: first perfect-transport peak
    Tr = np.arange(176.0, 188.0, 0.5)
    pr = [reduced_pmm_numeric(ChainModel(16, 1.0, 0.9, 0.1, float(T)))
          for T in Tr]
    rpeaks = _refined_extrema(Tr, np.array(pr), "max")
    assert rpeaks, "no reduced-model peak found in the scan window"
    t_red, p_red = rpeaks[0]
    ok_red = 179.0 <= t_red <= 184.0 and p_red > 0.999

    t_qsl = qsl_time(ChainModel(16, 1.0, 0.9, 0.1, 170.0))
    ok_qsl = abs(t_qsl - 180.0) <= 2.0
    _line("6 (SSH transport)", ok_chain and ok_red and ok_qsl,
          f"chain peak T={t_peak:.1f} (P={p_peak:.4f}), "
          f"reduced peak T={t_red:.1f} (P={p_red:.5f}), T_QSL={t_qsl:.1f}")
    assert 165.0 <= t_peak <= 175.0
    assert p_peak > 0.99
    assert 179.0 <= t_red <= 184.0
    assert p_red > 0.999
    assert abs(t_qsl - 180.0) <= 2.0


# ---------------------------------------------------------------- 7

def test_criterion_7_reduction_fidelity():
    from lzsm.ssh import edge_states, reduced_coefficients

    model = ChainModel(16, 1.0, 0.9, 0.1, 170.0)
    T = model.total_time
    ts = np.linspace(0.0, T, 100)
    worst = 0.0
    for t in ts:
        d_tilde, k_tilde = reduced_coefficients(model, float(t))
        pair = edge_states(float(model.eta(t)), model.n_cells)
        h = model.matrix(float(t))
        worst = max(worst,
                    abs(d_tilde - pair.left @ h @ pair.left),
                    abs(k_tilde - pair.left @ h @ pair.right))
    d_fwd, k_fwd = reduced_coefficients(model, ts)
    d_rev, k_rev = reduced_coefficients(model, T - ts)
    parity = max(float(np.max(np.abs(d_fwd + d_rev))),
                 float(np.max(np.abs(k_fwd - k_rev))))
    ok = worst < 1e-10 and parity < 1e-10
    _line("7 (reduction fidelity)", ok,
          f"sandwich dev={worst:.2e}, parity dev={parity:.2e}")
    assert worst < 1e-10
    assert parity < 1e-10


# ---------------------------------------------------------------- 8

def test_criterion_8_stage_matrix_relations():
    cases = [("example1", ex1(5.0), Z_AXIS, 1.35),
             ("reduced-ssh", reduced_schedule(ChainModel(16, 1.0, 0.9, 0.1,
                                                         170.0)), Z_AXIS, 60.0)]
    worst_diabatic = worst_eigen = 0.0
    for label, sched, axis, t_f in cases:
        T = sched.duration
        n = 40_000
        sr = pauli_axis(axis).matrix()
        u_i = propagator_matrix(sched, 0.0, t_f, n)
        u_iii = propagator_matrix(sched, T - t_f, T, n)
        dev = float(np.linalg.norm(u_i - sr @ np.linalg.inv(u_iii) @ sr))
        worst_diabatic = max(worst_diabatic, dev)
        cu_i, cu_iii = eigenbasis_stage_matrices(sched, axis, t_f, n)
        dev2 = float(np.linalg.norm(
            cu_iii - SIGMA_X @ np.linalg.inv(cu_i) @ SIGMA_X))
        worst_eigen = max(worst_eigen, dev2)
    ok = worst_diabatic < 1e-6 and worst_eigen < 1e-5
    _line("8 (stage-matrix relations)", ok,
          f"diabatic dev={worst_diabatic:.2e}, eigenbasis dev={worst_eigen:.2e}")
    assert worst_diabatic < 1e-6
    assert worst_eigen < 1e-5


# ---------------------------------------------------------------- 9

def test_criterion_9_numerical_hygiene():
    rng = np.random.default_rng(2)
    unit_dev = 0.0
    for _ in range(40):
        op = HermitianOperator2(*(rng.normal(size=4) * 4))
        u = step_unitary_2x2(op, rng.uniform(1e-5, 0.8))
        unit_dev = max(unit_dev, float(np.linalg.norm(
            u.conj().T @ u - np.eye(2))))

    sched = ex1(4.0)
    psi0 = eigenframe(sched, 0.0, Z_AXIS).v_minus
    traj = evolve(sched, psi0, 0.0, 4.0, 10_000)
    norm_dev = float(np.max(np.abs(np.linalg.norm(traj.states, axis=1) - 1.0)))

    anti_dev = 0.0
    for t in np.linspace(0.0, 4.0, 61):
        a = eigenframe(sched, float(t), Z_AXIS, half="first")
        b = eigenframe(sched, float(4.0 - t), Z_AXIS, half="first")
        anti_dev = max(anti_dev, abs(a.e_minus + b.e_plus),
                       abs(a.e_plus + b.e_minus))

    finals = [evolve(sched, psi0, 0.0, 4.0, n).final_state
              for n in (1000, 2000, 4000)]
    ratio = float(np.linalg.norm(finals[0] - finals[1])
                  / np.linalg.norm(finals[1] - finals[2]))

    ok = (unit_dev < 1e-12 and norm_dev < 1e-9 and anti_dev < 1e-10
          and ratio > 3.0)
    _line("9 (numerical hygiene)", ok,
          f"unitarity={unit_dev:.1e} norm={norm_dev:.1e} "
          f"antisymmetry={anti_dev:.1e} order ratio={ratio:.2f}")
    assert unit_dev < 1e-12
    assert norm_dev < 1e-9
    assert anti_dev < 1e-10
    assert ratio > 3.0


# ---------------------------------------------------------------- extras

def test_adiabatic_threshold_weak_check():
    p = transport_probability(ChainModel(16, 1.0, 0.9, 0.1, 3000.0))
    ok = p > 0.98
    _line("A (adiabatic threshold, weak)", ok, f"P_2N(T=3000)={p:.5f}")
    assert p > 0.98


def test_spectrum_regression_against_golden_file():
    model = ChainModel(16, 1.0, 0.9, 0.1, 170.0)
    ts, energies = spectrum_vs_time(model, np.linspace(0.0, 170.0, 201))
    with open(DATA_DIR / "golden_spectrum_n16.csv") as fh:
        reader = csv.reader(fh)
        next(reader)
        golden = np.array([[float(x) for x in row] for row in reader])
    ok = (np.allclose(golden[:, 0], ts, atol=1e-9)
          and np.allclose(golden[:, 1:], energies, atol=1e-9))
    _line("B (spectrum regression)", ok,
          f"max dev={np.max(np.abs(golden[:, 1:] - energies)):.2e}")
    assert ok
