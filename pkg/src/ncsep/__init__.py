"""Separability of Gaussian states of a two-dimensional oscillator in noncommutative space."""

from .canonical import (
    DerivedParams, NormalModeDecomposition, OscillatorConfig, OscillatorPoint, appendix_diagnostics,
    build_hamiltonian, build_omega, build_Q, derived_params, drive_terms, eigenvector_gammas,
    normal_frequencies, paper_gammas,
)
from .covariance import (
    QuadraticMoments, commutative_blocks, commutative_limit_ps, covariance_via_expectations,
    expectation_positions, moments_for, nc_covariance, q13_moments,
)
from .dynamics import (
    BetaTrajectory, ConstantModes, OscillatorModes, PhaseRecord, beta_quadrature, constraint_residual,
    dynamic_phase, geometric_phase, integrate_beta, phase_record,
)
from .errors import NCSepError
from .experiment import find_transitions, run_toy, sweep, toy_config, toy_pipeline_ps, toy_ps_closed_form
from .separability import (
    CovarianceMatrix, Frame, SeparabilityReport, local_invariants, mirror_reflection, nc_to_commutative,
    rsup_check, separability_report, simon_ps, symplectic_eigenvalues, williamson_normal_form,
)
from .symplectic import (
    NCParams, bopp_shift, bopp_shift_inverse, deformed_symplectic, effective_planck, standard_symplectic,
    symplectic_correspondence_residual,
)

__version__ = "0.1.0"
