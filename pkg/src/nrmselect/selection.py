"""Rank certificates for the regularization parameter.

Three sources of certificates are provided:

``exact_dual``
    ``lam > sigma_k(A*(theta*))`` with the exact dual solution ``theta*``.
``gap_ball``
    The same test, but using any feasible pair and widening the threshold by
    the radius of the duality-gap ball that must contain ``theta*``.
``closed_form``
    The gap-ball test evaluated at the radially scaled pair, solved in closed
    form as a quadratic inequality in ``lam`` for every ``k``.

Each test certifies ``rank(B*(lam)) <= k - 1``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .duality import duality_gap, theta_max
from .errors import DegenerateProblemError, InfeasibleDualError
from .matrix_core import adjoint_apply, forward_apply, singular_values
from .problem import NrmProblem

EXACT_DUAL = "exact_dual"
GAP_BALL = "gap_ball"
CLOSED_FORM = "closed_form"

LOWER_BOUND = "lower_bound"
INTERVAL = "interval"
EMPTY = "empty"

ZERO_COEF_RTOL = 1e-12
ROUNDING_GUARD = 1e-12

# How the gap-ball radius is turned into a bound on sigma_k(A*(theta*)).
MEAN_SPECTRAL = "mean_spectral"
STRICT = "strict"
RADIUS_RULES = (MEAN_SPECTRAL, STRICT)
DEFAULT_RULE = STRICT


def operator_bound_sq(data, rule=DEFAULT_RULE):
    """Squared constant ``K^2`` with ``sigma_k(A*(theta*)) <= sigma_k(A*(theta)) + K sqrt(2 Gap / alpha)``.

    ``mean_spectral``: ``K^2 = sum_i ||X_i||_2^2 / n``.  This relies on a gap ball of
    radius ``sqrt(2 Gap / (n alpha))``, which is too small by ``sqrt(n)`` in
    general and can certify ranks the solution does not have.

    ``strict``: ``K^2 = min(sum_i ||X_i||_2^2, ||A||_op^2)``, from the
    correct radius ``sqrt(2 Gap / alpha)`` (the dual objective is only
    ``alpha``-strongly concave) and ``||A*(eta)||_2 <= min(...) ||eta||_2``.
    """
    if rule == MEAN_SPECTRAL:
        return data.sum_sq_spectral / data.n
    if rule == STRICT:
        return min(data.sum_sq_spectral, data.operator_norm ** 2)
    raise ValueError(f"unknown radius rule {rule!r}")


@dataclass(frozen=True)
class RankCertificate:
    lam: float
    bound: int | None
    source: str

    @property
    def certified(self):
        return self.bound is not None


@dataclass(frozen=True, eq=False)
class SelectionCoefficients:
    """Scalars of the closed-form rule, computed from ``tau = theta_max``.

    With ``M = A*(tau)``, ``lmax = sigma_1(M)``, ``u = A(M) / lmax`` and
    ``K^2 = operator_bound_sq(data, rule)`` the rank-``(k-1)`` test at the
    scaled pair reads ``a[k] lam^2 - 2 b lam - c > 0`` where::

        a[k] = alpha (lmax - sigma_k)^2 / (lmax^2 K^2) - ||tau||^2 / lmax^2
        b    = (||M||_* - <y, tau>) / lmax
        c    = 2 sum_i f(y_i - u_i)
        d    = lmax - ||tau|| K / sqrt(alpha)      (a[k] > 0 iff sigma_k < d)

    For least squares ``<y, tau> = ||y||^2`` and ``c = sum_i (y_i - u_i)^2``;
    with ``rule="mean_spectral"``, ``K^2 = sum_i ||X_i||_2^2 / n``.
    """

    lambda_max: float
    tau: np.ndarray
    sigma: np.ndarray
    a: np.ndarray
    b: float
    c: float
    d: float
    sum_sq_spectral: float
    operator_bound_sq: float
    rule: str = DEFAULT_RULE

    @property
    def r(self):
        return self.sigma.shape[0]

    def delta(self, k):
        """``sqrt(b^2 + a_k c)`` for 1-based `k`, or None when the radicand is negative."""
        rad = self.b * self.b + self.a[k - 1] * self.c
        if rad < 0:
            return None
        return math.sqrt(rad)

    def quadratic(self, k, lam):
        return self.a[k - 1] * lam * lam - 2 * self.b * lam - self.c


@dataclass(frozen=True)
class SequenceEntry:
    """Certified set for one ``k``: ``(lower, inf)``, ``(lower, upper)`` or nothing."""

    k: int
    kind: str
    lower: float | None = None
    upper: float | None = None

    def contains(self, lam):
        if self.kind == LOWER_BOUND:
            return lam > self.lower
        if self.kind == INTERVAL:
            return self.lower < lam < self.upper
        return False

    def boundaries(self):
        """Finite positive endpoints, i.e. roots of the defining quadratic."""
        vals = [v for v in (self.lower, self.upper) if v is not None and v > 0]
        return vals


@dataclass(frozen=True)
class LambdaSequence:
    lambda_max: float
    entries: tuple = field(default_factory=tuple)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, k):
        """Entry for 1-based `k`."""
        if not 1 <= k <= len(self.entries):
            raise IndexError(k)
        return self.entries[k - 1]

    def defined(self):
        return [e for e in self.entries if e.kind != EMPTY]


def gap_ball_thresholds(data, loss, pair, rule=DEFAULT_RULE):
    """Per-``k`` thresholds: ``lam > thresholds[k-1]`` certifies rank ``<= k-1``.

    ``thresholds[k-1] = sigma_k(A*(theta)) + sqrt(2 Gap / alpha * K^2)`` where
    ``Gap`` is the duality gap of `pair` and ``K^2`` comes from
    :func:`operator_bound_sq`; with ``rule="mean_spectral"`` it is
    ``sum_i ||X_i||_2^2 / n``.
    """
    prob = NrmProblem(data, loss, pair.lam)
    gap = duality_gap(prob, pair)
    sigma = singular_values(adjoint_apply(data, pair.theta))
    # rounding guard: a computed gap of ~0 must not turn a tight sigma_k into a certificate
    primal = abs(loss.total(pair.t)) + pair.lam * float(np.sum(singular_values(pair.B)))
    gap = max(gap, 0.0) + ROUNDING_GUARD * (1.0 + primal)
    radius = math.sqrt(2.0 * gap / loss.alpha * operator_bound_sq(data, rule))
    return sigma + ROUNDING_GUARD * sigma[0] + radius


def exact_dual_thresholds(data, theta_star):
    """Thresholds with zero gap-ball radius; only sound for the exact dual solution."""
    return singular_values(adjoint_apply(data, theta_star))


def certificate_from_thresholds(thresholds, lam, source):
    """Smallest ``k`` with ``lam > thresholds[k-1]`` gives the bound ``k - 1``."""
    hits = np.flatnonzero(lam > np.asarray(thresholds))
    bound = int(hits[0]) if hits.size else None
    return RankCertificate(lam=float(lam), bound=bound, source=source)


def gap_ball_certificate(data, loss, pair, rule=DEFAULT_RULE):
    try:
        thr = gap_ball_thresholds(data, loss, pair, rule)
    except InfeasibleDualError:
        return RankCertificate(lam=float(pair.lam), bound=None, source=GAP_BALL)
    return certificate_from_thresholds(thr, pair.lam, GAP_BALL)


def exact_dual_certificate(data, theta_star, lam):
    return certificate_from_thresholds(exact_dual_thresholds(data, theta_star), lam, EXACT_DUAL)


def selection_coefficients(data, loss, rule=DEFAULT_RULE):
    tau = theta_max(data, loss)
    M = adjoint_apply(data, tau)
    sigma = singular_values(M)
    lmax = float(sigma[0])
    if lmax == 0:
        raise DegenerateProblemError("lambda_max is zero; no parameter selection is possible")
    K2 = operator_bound_sq(data, rule)
    tau_sq = float(tau @ tau)
    u = forward_apply(data, M) / lmax
    a = loss.alpha * (lmax - sigma) ** 2 / (lmax * lmax * K2) - tau_sq / (lmax * lmax)
    b = (float(np.sum(sigma)) - float(data.response @ tau)) / lmax
    c = 2.0 * loss.total(data.response - u)
    d = lmax - math.sqrt(tau_sq) * math.sqrt(K2 / loss.alpha)
    return SelectionCoefficients(
        lambda_max=lmax, tau=tau, sigma=sigma, a=a, b=b, c=c, d=d,
        sum_sq_spectral=data.sum_sq_spectral, operator_bound_sq=K2, rule=rule)


def lambda_sequence(coef):
    """Solve ``a_k lam^2 - 2 b lam - c > 0`` for every ``k``."""
    entries = []
    zero_tol = ZERO_COEF_RTOL * (1 + abs(coef.a[0]))
    b, c = coef.b, coef.c
    for k in range(1, coef.r + 1):
        ak = float(coef.a[k - 1])
        if abs(ak) <= zero_tol:
            if b < 0:
                entries.append(SequenceEntry(k, LOWER_BOUND, lower=c / (-2 * b)))
            else:
                entries.append(SequenceEntry(k, EMPTY))
            continue
        delta = coef.delta(k)
        if ak > 0:
            # c >= 0 keeps delta real and (b + delta) / a >= 0.
            entries.append(SequenceEntry(k, LOWER_BOUND, lower=max(0.0, (b + delta) / ak)))
            continue
        if delta is None:
            entries.append(SequenceEntry(k, EMPTY))
            continue
        lo = max((b + delta) / ak, 0.0)
        hi = (b - delta) / ak
        if hi > lo:
            entries.append(SequenceEntry(k, INTERVAL, lower=lo, upper=hi))
        else:
            entries.append(SequenceEntry(k, EMPTY))
    return LambdaSequence(lambda_max=coef.lambda_max, entries=tuple(entries))


def select(data, loss, rule=DEFAULT_RULE):
    """Coefficients and sequence in one call."""
    coef = selection_coefficients(data, loss, rule)
    return coef, lambda_sequence(coef)


def rank_bound_for_lambda(seq, lam):
    """Best rank bound the closed-form sequence certifies at `lam`, if any."""
    if lam > seq.lambda_max:
        return RankCertificate(lam=float(lam), bound=0, source=CLOSED_FORM)
    for entry in seq.entries:
        if entry.contains(lam):
            return RankCertificate(lam=float(lam), bound=entry.k - 1, source=CLOSED_FORM)
    return RankCertificate(lam=float(lam), bound=None, source=CLOSED_FORM)


def certified_region(seq, max_rank):
    """Intervals of ``(0, lambda_max]`` on which rank ``<= max_rank`` is certified.

    Returns a sorted list of disjoint ``(lo, hi)`` open-ish intervals (``hi``
    capped at ``lambda_max``).
    """
    pieces = []
    for entry in seq.entries[: max_rank + 1]:
        if entry.kind == LOWER_BOUND:
            hi = seq.lambda_max
            if entry.lower < hi:
                pieces.append((entry.lower, hi))
        elif entry.kind == INTERVAL:
            hi = min(entry.upper, seq.lambda_max)
            if entry.lower < hi:
                pieces.append((entry.lower, hi))
    pieces.sort()
    merged = []
    for lo, hi in pieces:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged
