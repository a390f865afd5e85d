"""Ground-state and nodal solutions of double-phase Dirichlet problems by Nehari-set minimization."""

from .eigen import EigenResult, first_eigenpair, lemma1_diagnostic, rayleigh_quotient, theta_quotient
from .energy import energy, energy_terms, nehari_defect, residual
from .fibering import FiberingResult, ProjectionError, fibering_curve, fibering_values, project_to_nehari
from .mesh import (
    Field,
    Mesh,
    build_interval_mesh,
    build_rectangle_mesh,
    gradient,
    integrate_power,
    negative_part,
    positive_part,
)
from .problem import (
    DoublePhaseProblem,
    check_ar_condition,
    check_hypotheses_f,
    constant_weight,
    indicator_weight,
    linear_reaction,
    log_reaction,
    power_reaction,
    power_weight,
    problem_from_config,
    validate_exponents,
)
from .solver import SolveOptions, SolveReport, sign_classification, solve_ground_state, solve_nodal

__version__ = "0.1.0"
