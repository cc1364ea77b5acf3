"""Accelerated proximal gradient (FISTA) for the nuclear-norm regularized problem.

Each iteration takes a gradient step on the smooth loss term, applies singular
value thresholding, and extrapolates with Nesterov momentum.  Momentum is
reset whenever the objective increases.  Stopping is on the duality gap at the
dual point recovered from the residuals.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .duality import FeasiblePair, recover_dual
from .errors import InvalidInputError
from .matrix_core import adjoint_apply, singular_values, svt_with_values
from .problem import INFEASIBLE

FIXED = "fixed_from_lipschitz"
BACKTRACKING = "backtracking"


@dataclass(frozen=True)
class SolverOptions:
    max_iterations: int = 5000
    gap_tolerance: float = 1e-7
    step_rule: str = FIXED
    restart: bool = True
    gap_check_every: int = 1

    def __post_init__(self):
        if self.max_iterations < 1:
            raise InvalidInputError("max_iterations must be >= 1")
        if not self.gap_tolerance > 0:
            raise InvalidInputError("gap_tolerance must be positive")
        if self.step_rule not in (FIXED, BACKTRACKING):
            raise InvalidInputError(f"unknown step rule {self.step_rule!r}")
        if self.gap_check_every < 1:
            raise InvalidInputError("gap_check_every must be >= 1")


@dataclass(eq=False)
class Solution:
    B: np.ndarray
    t: np.ndarray
    theta: np.ndarray
    lam: float
    objective: float
    final_gap: float
    iterations: int
    converged: bool
    gap_history: list = field(default_factory=list)

    @property
    def pair(self):
        return FeasiblePair(B=self.B, t=self.t, theta=self.theta, lam=self.lam)


def lipschitz_estimate(data, min_iterations=30, max_iterations=1000, rtol=1e-12):
    """Upper estimate of ``||A||_op^2`` by power iteration on ``A* A``, inflated by 5%."""
    A = data.flat
    v = np.random.Generator(np.random.Philox(0)).standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    est = 0.0
    for it in range(max_iterations):
        w = A.T @ (A @ v)
        new = float(np.linalg.norm(w))
        if new == 0.0:
            return 1e-300
        v = w / new
        done = it + 1 >= min_iterations and abs(new - est) <= rtol * new
        est = new
        if done:
            break
    return 1.05 * est


def numerical_rank(B, rel_tol=1e-6):
    """Number of singular values above ``rel_tol * sigma_1``."""
    s = singular_values(B)
    if s.size == 0:
        return 0
    return int(np.sum(s > rel_tol * max(float(s[0]), 1e-30)))


class _Oracle:
    """Objective, gradient and gap evaluations sharing one dataset."""

    def __init__(self, prob):
        self.data = prob.data
        self.loss = prob.loss
        self.lam = prob.lam
        self.A = prob.data.flat
        self.y = prob.data.response

    def smooth(self, Az):
        return self.loss.total(self.y - Az)

    def grad(self, Az):
        # d/dB sum f(y - A B) = -A*(f'(y - A B))
        return -(self.loss.gradient(self.y - Az) @ self.A)

    def gap(self, B, AB, nuc):
        t = self.y - AB
        primal = self.loss.total(t) + self.lam * nuc
        theta = recover_dual(self.data, self.loss, t, self.lam)
        conj = self.loss.conjugate_sum(theta)
        if conj is INFEASIBLE:
            return primal, math.inf, t, theta
        return primal, primal - (float(self.y @ theta) - conj), t, theta


def solve_nrm(prob, opts=None, lipschitz=None):
    """Minimize ``sum_i f(y_i - <X_i, B>) + lam ||B||_*``.

    Parameters
    ----------
    prob : NrmProblem
    opts : SolverOptions, optional
    lipschitz : float, optional
        Precomputed :func:`lipschitz_estimate` for ``prob.data``; pass it when
        solving many problems on the same dataset.

    Returns
    -------
    Solution
        The iterate with the smallest duality gap seen.  ``converged`` is set
        when that gap is below ``gap_tolerance * (1 + |F(B)|)``; running out of
        iterations is reported, not raised.
    """
    opts = opts or SolverOptions()
    data = prob.data
    p, q = data.p, data.q
    oracle = _Oracle(prob)
    A = oracle.A
    if lipschitz is None:
        lipschitz = lipschitz_estimate(data)
    L = lipschitz / prob.loss.alpha
    if opts.step_rule == BACKTRACKING:
        L = L / 8.0

    x = np.zeros(p * q)
    Ax = np.zeros(data.n)
    nuc = 0.0
    F_prev, gap, t_res, theta = oracle.gap(x, Ax, nuc)
    best = (gap, x, t_res, theta, F_prev)
    history = [gap]
    z, Az = x, Ax
    mom = 1.0
    it = 0
    if gap <= opts.gap_tolerance * (1 + abs(F_prev)):
        return _solution(best, prob, p, q, 0, True, history)

    while it < opts.max_iterations:
        it += 1
        g = oracle.grad(Az)
        while True:
            Z, shrunk = svt_with_values((z - g / L).reshape(p, q), prob.lam / L)
            x_new = Z.ravel()
            Ax_new = A @ x_new
            if opts.step_rule != BACKTRACKING:
                break
            diff = x_new - z
            bound = oracle.smooth(Az) + float(g @ diff) + 0.5 * L * float(diff @ diff)
            if oracle.smooth(Ax_new) <= bound * (1 + 1e-12) + 1e-300:
                break
            L *= 2.0
        nuc_new = float(np.sum(shrunk))
        F_new = oracle.smooth(Ax_new) + prob.lam * nuc_new

        if opts.restart and F_new > F_prev and mom > 1.0:
            # Redo the step from x without momentum.
            mom = 1.0
            z, Az = x, Ax
            continue
        mom_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * mom * mom))
        beta = (mom - 1.0) / mom_next
        z = x_new + beta * (x_new - x)
        Az = Ax_new + beta * (Ax_new - Ax)
        x, Ax, F_prev, mom = x_new, Ax_new, F_new, mom_next

        if it % opts.gap_check_every == 0 or it == opts.max_iterations:
            F_cur, gap, t_res, theta = oracle.gap(x, Ax, nuc_new)
            if gap < best[0]:
                best = (gap, x, t_res, theta, F_cur)
            history.append(best[0])
            if best[0] <= opts.gap_tolerance * (1 + abs(best[4])):
                return _solution(best, prob, p, q, it, True, history)

    gap_b, _, _, _, F_b = best
    return _solution(best, prob, p, q, it,
                     gap_b <= opts.gap_tolerance * (1 + abs(F_b)), history)


def _solution(best, prob, p, q, iterations, converged, history):
    gap, x, t, theta, F = best
    return Solution(
        B=x.reshape(p, q).copy(), t=t, theta=theta, lam=float(prob.lam),
        objective=float(F), final_gap=float(gap), iterations=iterations,
        converged=bool(converged), gap_history=history)
