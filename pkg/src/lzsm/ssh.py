"""Finite SSH chain with boundary driving and its reduced two-level model.

The chain is a single-particle hopping matrix on 2N sites: intracell
bonds carry v(t) = v0 sin(pi t/T), intercell bonds carry w, and site 1
carries the on-site energy Delta(t) = -Delta0 cos(pi t/T).  For
|v0| < |w| the chain stays topological throughout and hosts a pair of
in-gap edge states whose dynamics reduces to a two-level model in the
(|L>, |R>) basis.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, partial

import numpy as np
from scipy.integrate import simpson

from .adiabatic import eigenframe
from .errors import EdgeRegimeError
from .pauli import SymmetryAxis
from .propagator import default_tls_steps, evolve
from .schedules import TlsSchedule, zero_coeff

CHAIN_DT = 0.01  # default chain step size, units 1/J


@dataclass(frozen=True)
class ChainModel:
    """Finite SSH chain parameters; 2*n_cells lattice sites."""

    n_cells: int
    w: float
    v0: float
    delta0: float
    total_time: float

    def __post_init__(self):
        if self.n_cells < 2:
            raise ValueError("need at least two unit cells")
        if not abs(self.v0) < abs(self.w):
            raise ValueError("topological regime requires |v0| < |w|")
        if self.total_time <= 0:
            raise ValueError("total_time must be positive")

    @property
    def n_sites(self) -> int:
        return 2 * self.n_cells

    def intracell(self, t):
        return self.v0 * np.sin(np.pi * np.asarray(t, dtype=float) / self.total_time)

    def onsite(self, t):
        return -self.delta0 * np.cos(np.pi * np.asarray(t, dtype=float) / self.total_time)

    def eta(self, t):
        """Localization factor -v(t)/w of the edge states."""
        return -self.intracell(t) / self.w

    @cached_property
    def _bond_matrices(self):
        n = self.n_sites
        b_v = np.zeros((n, n))
        b_w = np.zeros((n, n))
        b_d = np.zeros((n, n))
        for cell in range(self.n_cells):
            i = 2 * cell
            b_v[i, i + 1] = b_v[i + 1, i] = 1.0
        for cell in range(self.n_cells - 1):
            i = 2 * cell + 1
            b_w[i, i + 1] = b_w[i + 1, i] = 1.0
        b_d[0, 0] = 1.0
        return b_v, b_w, b_d

    def matrix(self, t: float) -> np.ndarray:
        """Chain hopping matrix at time t; Hermitian by construction."""
        b_v, b_w, b_d = self._bond_matrices
        return (float(self.intracell(t)) * b_v + self.w * b_w
                + float(self.onsite(t)) * b_d)

    def matrix_batch(self, ts) -> np.ndarray:
        b_v, b_w, b_d = self._bond_matrices
        v = np.atleast_1d(self.intracell(ts))[:, None, None]
        d = np.atleast_1d(self.onsite(ts))[:, None, None]
        return v * b_v + self.w * b_w + d * b_d


def build_chain(model: ChainModel, t: float) -> np.ndarray:
    return model.matrix(t)


@dataclass(frozen=True)
class EdgeStatePair:
    """Normalized left/right edge states at a given localization factor."""

    left: np.ndarray
    right: np.ndarray
    eta: float


def edge_states(eta: float, n_cells: int) -> EdgeStatePair:
    """Edge states L on odd sites, R on even sites, geometric profile eta^k.

    Normalization uses the closed form sum eta^{2k} = (1 - eta^{2N}) /
    (1 - eta^2), which stays finite through eta -> 0.
    """
    if not abs(eta) < 1.0:
        raise EdgeRegimeError(f"|eta| = {abs(eta)} outside the regime |eta| < 1")
    n = 2 * n_cells
    powers = eta ** np.arange(n_cells)
    if eta == 0.0:
        norm_sq = 1.0
    else:
        norm_sq = (1.0 - eta ** (2 * n_cells)) / (1.0 - eta * eta)
    left = np.zeros(n)
    right = np.zeros(n)
    left[0::2] = powers
    right[np.arange(n - 1, 0, -2)] = powers
    scale = 1.0 / np.sqrt(norm_sq)
    return EdgeStatePair(left=left * scale, right=right * scale, eta=float(eta))


def _geometric_ratio(eta, n_cells: int):
    """(1 - eta^2)/(1 - eta^{2N}); equals the analytic limit 1 at eta = 0."""
    e2 = np.asarray(eta, dtype=float) ** 2
    return (1.0 - e2) / (1.0 - e2 ** n_cells)


def reduced_coefficients(model: ChainModel, t):
    """Effective (Delta_tilde, kappa_tilde) of the edge-state two-level model.

    Delta_tilde = Delta(t) (1 - eta^2)/(1 - eta^{2N}),
    kappa_tilde = v(t) eta^{N-1} (1 - eta^2)/(1 - eta^{2N});
    identical to the brute-force matrix elements <L|H|L> and <L|H|R>.
    """
    eta = model.eta(t)
    ratio = _geometric_ratio(eta, model.n_cells)
    d_tilde = model.onsite(t) * ratio
    k_tilde = model.intracell(t) * eta ** (model.n_cells - 1) * ratio
    return d_tilde, k_tilde


def _reduced_half_delta(u, n_cells, w, v0, delta0, total_time):
    model = ChainModel(n_cells, w, v0, delta0, total_time)
    return 0.5 * reduced_coefficients(model, u)[0]


def _reduced_kappa(u, n_cells, w, v0, delta0, total_time):
    model = ChainModel(n_cells, w, v0, delta0, total_time)
    return reduced_coefficients(model, u)[1]


def reduced_schedule(model: ChainModel) -> TlsSchedule:
    """Two-level drive (d0, dx, dy, dz) = (D/2, k, 0, D/2) of the edge pair.

    Mirror-symmetric for the z-axis operator because Delta_tilde is odd
    and kappa_tilde even about T/2.
    """
    kw = dict(n_cells=model.n_cells, w=model.w, v0=model.v0,
              delta0=model.delta0, total_time=model.total_time)
    funcs = (
        partial(_reduced_half_delta, **kw),
        partial(_reduced_kappa, **kw),
        zero_coeff,
        partial(_reduced_half_delta, **kw),
    )
    return TlsSchedule(duration=model.total_time, funcs=funcs,
                       frame="cartesian", axis=SymmetryAxis(0.0, 0.0))


def chain_steps(model: ChainModel, dt_max: float = CHAIN_DT) -> int:
    return max(1, int(np.ceil(model.total_time / dt_max)))


def transport_probability(model: ChainModel, n_steps: int | None = None) -> float:
    """Probability on the last site after injecting the particle at site 1.

    Evolves the site-1 basis vector over the full protocol and returns
    |<2N|psi(T)>|^2.
    """
    n = n_steps if n_steps is not None else chain_steps(model)
    psi0 = np.zeros(model.n_sites, dtype=complex)
    psi0[0] = 1.0
    traj = evolve(model, psi0, 0.0, model.total_time, n, max_samples=2)
    return float(abs(traj.final_state[-1]) ** 2)


def reduced_pmm_numeric(model: ChainModel, n_steps: int | None = None) -> float:
    """Ground-state survival of the reduced two-level model at t = T."""
    sched = reduced_schedule(model)
    axis = SymmetryAxis(0.0, 0.0)
    n = n_steps if n_steps is not None else default_tls_steps(model.total_time)
    psi0 = eigenframe(sched, 0.0, axis).v_minus
    traj = evolve(sched, psi0, 0.0, model.total_time, n, max_samples=2)
    frame_end = eigenframe(sched, model.total_time, axis, half="second")
    return float(abs(np.vdot(frame_end.v_minus, traj.final_state)) ** 2)


def qsl_time(model: ChainModel, n_points: int = 20001) -> float:
    """Speed-limit time pi / (2 <|kappa_tilde|>) for the edge transfer.

    The coupling profile depends on t only through t/T, so the average
    (and the returned time) is independent of the model's total_time.
    """
    s = np.linspace(0.0, 1.0, n_points)
    ref = ChainModel(model.n_cells, model.w, model.v0, model.delta0, 1.0)
    _, kappa = reduced_coefficients(ref, s)
    avg = float(simpson(np.abs(kappa), x=s))
    if avg == 0.0:
        raise ZeroDivisionError("time-averaged coupling strength is zero")
    return float(np.pi / (2.0 * avg))


def spectrum_vs_time(model: ChainModel, grid) -> tuple[np.ndarray, np.ndarray]:
    """Sorted eigenvalues of the chain on a time grid.

    Returns (times, energies) with energies of shape (len(grid), 2N) in
    ascending order; the in-gap edge branches sit at columns N-1 and N.
    """
    ts = np.asarray(grid, dtype=float)
    energies = np.linalg.eigvalsh(model.matrix_batch(ts))
    return ts, energies


def edge_branches(model: ChainModel, energies: np.ndarray):
    """The two mid-gap branches, selected by energy-ordering index."""
    return energies[:, model.n_cells - 1], energies[:, model.n_cells]


def write_transport_csv(values, p_chain, p_reduced, path) -> None:
    """Transport sweep table: T, P_2N, P_mm_reduced."""
    import csv

    from .analysis import format_float

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["T", "P_2N", "P_mm_reduced"])
        for row in zip(values, p_chain, p_reduced):
            writer.writerow([format_float(x) for x in row])


def write_spectrum_csv(times, energies, path) -> None:
    """Spectrum table: t, E_1 .. E_2N (ascending)."""
    import csv

    from .analysis import format_float

    n_bands = energies.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"E_{k + 1}" for k in range(n_bands)])
        for t, row in zip(times, energies):
            writer.writerow([format_float(t)] + [format_float(e) for e in row])
