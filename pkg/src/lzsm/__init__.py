"""Simulation and transfer-matrix analysis of mirror-symmetric two-level
drives, with an application to edge-state transport on finite SSH chains."""

from .adiabatic import (EigenFrame, OccupationSeries, dynamical_phase,
                        eigenframe, gauge_self_connection, ground_state,
                        occupation_series, phi_c)
from .analysis import (InterferenceReport, Prediction, StageDecomposition,
                       SweepRow, analyze, detect_t_f, extract_RT, predict,
                       sweep, transfer_matrices, write_sweep_csv)
from .errors import (ConvergenceError, DegenerateInputError,
                     DegenerateSpectrumError, EdgeRegimeError,
                     InvalidStateError, ScheduleDomainError, SymmetryError,
                     TransitionDetectionError)
from .pauli import (SIGMA_0, SIGMA_X, SIGMA_Y, SIGMA_Z, HermitianOperator2,
                    SymmetryAxis, pauli_axis, rotated_frame)
from .propagator import (Trajectory, default_tls_steps, evolve,
                         evolve_converged, propagator_matrix,
                         step_unitary_2x2)
from .schedules import (Hold, TlsSchedule, check_symmetry, example1_schedule,
                        example2_schedule, hamiltonian_at,
                        piecewise_linear_schedule, rotated_coefficients,
                        schedule_from_config)
from .ssh import (ChainModel, EdgeStatePair, build_chain, edge_branches,
                  edge_states, qsl_time, reduced_coefficients,
                  reduced_pmm_numeric, reduced_schedule, spectrum_vs_time,
                  transport_probability)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
