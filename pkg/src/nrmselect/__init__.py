"""Regularization parameter selection for nuclear-norm regularized matrix recovery."""

from .duality import (
    FeasiblePair, KktResidual, closed_form_gap, dual_feasible, dual_objective,
    duality_gap, kkt_residual, lambda_max, scaled_feasible_pair, theta_max,
)
from .errors import (
    ConfigError, DatasetFormatError, DegenerateProblemError, InfeasibleDualError,
    InvalidInputError, NrmError,
)
from .matrix_core import (
    adjoint_apply, forward_apply, frobenius_norm, nuclear_norm, singular_values,
    spectral_norm, svt,
)
from .problem import (
    INFEASIBLE, Dataset, LossModel, NrmProblem, conjugate_eval, loss_eval,
    primal_objective,
)
from .selection import (
    LambdaSequence, RankCertificate, SelectionCoefficients, gap_ball_thresholds,
    lambda_sequence, rank_bound_for_lambda, selection_coefficients,
)
from .solver import Solution, SolverOptions, lipschitz_estimate, numerical_rank, solve_nrm

__version__ = "0.1.0"
