"""Dual problem, KKT residuals and duality gaps.

The dual of the regularized problem is

    max_theta  G(theta) = <y, theta> - sum_i f*(theta_i)
    s.t.       || sum_i theta_i X_i ||_2 <= lam

(plus the box ``|theta_i| <= kappa`` for the Huber loss, where ``f*`` is
infinite outside it).
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateProblemError, InfeasibleDualError, InvalidInputError
from .matrix_core import adjoint_apply, forward_apply, nuclear_norm, spectral_norm
from .problem import INFEASIBLE, NrmProblem, residuals

FEASIBILITY_SLACK = 1e-10


@dataclass(frozen=True, eq=False)
class FeasiblePair:
    """Primal point ``(B, t)`` with ``t = y - A(B)`` and a dual point `theta`."""

    B: np.ndarray
    t: np.ndarray
    theta: np.ndarray
    lam: float


@dataclass(frozen=True)
class KktResidual:
    spectral_excess: float
    subgradient_gap: float
    gradient_mismatch: float

    def max(self):
        return max(self.spectral_excess, self.subgradient_gap, self.gradient_mismatch)


def theta_max(data, loss):
    """Unconstrained maximizer of the dual objective.

    ``y`` for least squares, ``y`` clipped to ``[-kappa, kappa]`` for Huber.
    """
    y = data.response
    if loss.is_huber:
        return np.clip(y, -loss.kappa, loss.kappa)
    return y.copy()


def lambda_max(data, loss):
    """Smallest ``lam`` for which the zero matrix is optimal."""
    return spectral_norm(adjoint_apply(data, theta_max(data, loss)))


def dual_objective(data, loss, theta):
    """``<y, theta> - sum_i f*(theta_i)``, or INFEASIBLE outside the conjugate domain."""
    theta = _as_theta(data, theta)
    conj = loss.conjugate_sum(theta)
    if conj is INFEASIBLE:
        return INFEASIBLE
    return float(data.response @ theta) - conj


def dual_feasible(data, loss, theta, lam):
    theta = _as_theta(data, theta)
    if loss.is_huber and np.any(np.abs(theta) > loss.kappa * (1 + FEASIBILITY_SLACK)):
        return False
    return spectral_norm(adjoint_apply(data, theta)) <= lam * (1 + FEASIBILITY_SLACK)


def scaled_feasible_pair(data, loss, lam):
    """Feasible pair built from ``theta_max`` by radial scaling.

    ``theta = (lam / lam_max) * theta_max`` and ``B = A*(theta_max) / lam_max``.
    """
    tau = theta_max(data, loss)
    M = adjoint_apply(data, tau)
    lmax = spectral_norm(M)
    if lmax == 0:
        raise DegenerateProblemError("lambda_max is zero; the zero matrix is always optimal")
    if not (0 < lam <= lmax):
        raise InvalidInputError(f"lambda must lie in (0, lambda_max={lmax}], got {lam}")
    B = M / lmax
    return FeasiblePair(B=B, t=residuals(data, B), theta=(lam / lmax) * tau, lam=float(lam))


def duality_gap(prob, pair):
    """``F(B, t) - G(theta)`` for a feasible pair at ``prob.lam``."""
    data, loss = prob.data, prob.loss
    if not dual_feasible(data, loss, pair.theta, prob.lam):
        raise InfeasibleDualError("theta is not dual feasible at lambda=%g" % prob.lam)
    primal = loss.total(pair.t) + prob.lam * nuclear_norm(pair.B)
    dual = dual_objective(data, loss, pair.theta)
    return primal - dual


def closed_form_gap(data, loss, lam):
    """Gap at :func:`scaled_feasible_pair`, written out in terms of ``tau = theta_max``.

    ``sum_i f(y_i - <X_i, M>/lmax) + s ||M||_* - (s <y, tau> - s^2 ||tau||^2 / 2)``
    with ``M = A*(tau)`` and ``s = lam / lmax``.  Only valid for the built-in
    families, whose conjugate is ``xi^2 / 2`` on its domain.
    """
    tau = theta_max(data, loss)
    M = adjoint_apply(data, tau)
    lmax = spectral_norm(M)
    if lmax == 0:
        raise DegenerateProblemError("lambda_max is zero")
    s = lam / lmax
    fit = loss.total(data.response - forward_apply(data, M) / lmax)
    return fit + s * nuclear_norm(M) - (s * float(data.response @ tau) - 0.5 * s * s * float(tau @ tau))


def kkt_residual(prob, B, theta):
    """Residuals of the optimality system at ``(B, y - A(B), theta)``.

    ``A*(theta) in lam * d||B||_*`` is checked through the equivalent pair
    ``||A*(theta)||_2 <= lam`` and ``<A*(theta), B> = lam ||B||_*``.
    """
    data = prob.data
    theta = _as_theta(data, theta)
    B = np.asarray(B, dtype=np.float64)
    W = adjoint_apply(data, theta)
    t = residuals(data, B)
    return KktResidual(
        spectral_excess=max(0.0, spectral_norm(W) - prob.lam),
        subgradient_gap=abs(prob.lam * nuclear_norm(B) - float(np.sum(W * B))),
        gradient_mismatch=float(np.max(np.abs(theta - prob.loss.gradient(t)))),
    )


def recover_dual(data, loss, t, lam):
    """Dual point from primal residuals: ``theta = f'(t)``, shrunk into the spectral ball.

    For Huber ``f'`` already lands in the box, so only the spectral constraint
    needs enforcing.
    """
    theta = loss.gradient(t)
    norm = spectral_norm(adjoint_apply(data, theta))
    if norm > lam:
        theta = theta * (lam / norm)
    return theta


def _as_theta(data, theta):
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (data.n,):
        raise InvalidInputError(f"theta must have length n={data.n}, got shape {theta.shape}")
    return theta


__all__ = [
    "FeasiblePair", "KktResidual", "NrmProblem", "closed_form_gap", "dual_feasible",
    "dual_objective", "duality_gap", "kkt_residual", "lambda_max", "recover_dual",
    "scaled_feasible_pair", "theta_max",
]
