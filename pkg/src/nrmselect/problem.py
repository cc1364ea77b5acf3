"""Primal problem: datasets, loss families and the regularized objective

    F(B) = sum_i f(y_i - <X_i, B>) + lam * ||B||_*
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidInputError
from .matrix_core import forward_apply, nuclear_norm

LEAST_SQUARES = "least_squares"
HUBER = "huber"
DEFAULT_KAPPA = 2.5


class _Infeasible:
    """Marker for a ``+inf`` conjugate value.

    Deliberately supports no arithmetic so it cannot leak into sums as a float.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFEASIBLE"

    def __reduce__(self):
        return (_Infeasible, ())


INFEASIBLE = _Infeasible()


def is_infeasible(value):
    return value is INFEASIBLE


@dataclass(frozen=True, eq=False)
class Dataset:
    """Sensing matrices ``X_i`` (stacked as ``(n, p, q)``) and responses ``y``.

    Arrays are copied and made read-only on construction.
    """

    sensing: np.ndarray
    response: np.ndarray

    def __post_init__(self):
        X = np.array(self.sensing, dtype=np.float64)
        y = np.array(self.response, dtype=np.float64).reshape(-1)
        if X.ndim != 3:
            raise InvalidInputError(f"sensing must have shape (n, p, q), got {X.shape}")
        if X.shape[0] < 1 or X.shape[1] < 1 or X.shape[2] < 1:
            raise InvalidInputError(f"empty sensing stack {X.shape}")
        if y.shape[0] != X.shape[0]:
            raise InvalidInputError(
                f"response has length {y.shape[0]} but there are {X.shape[0]} sensing matrices")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise InvalidInputError("dataset has non-finite entries")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "sensing", X)
        object.__setattr__(self, "response", y)

    @property
    def n(self):
        return self.sensing.shape[0]

    @property
    def p(self):
        return self.sensing.shape[1]

    @property
    def q(self):
        return self.sensing.shape[2]

    @property
    def r(self):
        return min(self.p, self.q)

    @property
    def flat(self):
        """The sensing operator as an ``(n, p*q)`` matrix (row-major vec)."""
        return self.sensing.reshape(self.n, self.p * self.q)

    @cached_property
    def spectral_norms(self):
        """``||X_i||_2`` for each sensing matrix."""
        s = np.linalg.norm(self.sensing, ord=2, axis=(1, 2))
        s.flags.writeable = False
        return s

    @cached_property
    def sum_sq_spectral(self):
        """``sum_i ||X_i||_2^2``."""
        return float(np.sum(self.spectral_norms ** 2))

    @cached_property
    def operator_norm(self):
        """Largest singular value of the sensing operator as an ``(n, p*q)`` matrix."""
        return float(np.linalg.norm(self.flat, 2))

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.sensing.shape == other.sensing.shape
                and np.array_equal(self.sensing, other.sensing)
                and np.array_equal(self.response, other.response))

    __hash__ = None


@dataclass(frozen=True)
class LossModel:
    """Per-observation loss ``f`` shared by all observations.

    `alpha` is the constant such that ``f'`` is ``1/alpha``-Lipschitz; both
    built-in families have ``alpha = 1``.
    """

    family: str = LEAST_SQUARES
    kappa: float = DEFAULT_KAPPA
    alpha: float = 1.0

    def __post_init__(self):
        if self.family not in (LEAST_SQUARES, HUBER):
            raise InvalidInputError(f"unknown loss family {self.family!r}")
        if not (self.kappa > 0 and np.isfinite(self.kappa)):
            raise InvalidInputError(f"kappa must be positive, got {self.kappa}")
        if not (self.alpha > 0 and np.isfinite(self.alpha)):
            raise InvalidInputError(f"alpha must be positive, got {self.alpha}")

    @classmethod
    def least_squares(cls):
        return cls(LEAST_SQUARES)

    @classmethod
    def huber(cls, kappa=DEFAULT_KAPPA):
        return cls(HUBER, kappa=float(kappa))

    @property
    def is_huber(self):
        return self.family == HUBER

    def value(self, t):
        t = np.asarray(t, dtype=np.float64)
        if self.is_huber:
            k = self.kappa
            a = np.abs(t)
            return np.where(a <= k, 0.5 * t * t, k * a - 0.5 * k * k)
        return 0.5 * t * t

    def gradient(self, t):
        t = np.asarray(t, dtype=np.float64)
        if self.is_huber:
            return np.clip(t, -self.kappa, self.kappa)
        return t.copy()

    def conjugate_sum(self, xi):
        """``sum_i f*(xi_i)``, or INFEASIBLE if any term is ``+inf``."""
        xi = np.asarray(xi, dtype=np.float64)
        if self.is_huber and np.any(np.abs(xi) > self.kappa):
            return INFEASIBLE
        return float(0.5 * np.sum(xi * xi))

    def total(self, t):
        return float(np.sum(self.value(t)))


@dataclass(frozen=True, eq=False)
class NrmProblem:
    data: Dataset
    loss: LossModel
    lam: float

    def __post_init__(self):
        if not (self.lam > 0 and np.isfinite(self.lam)):
            raise InvalidInputError(f"lambda must be positive, got {self.lam}")


def _check_finite_scalar(t, name):
    t = float(t)
    if not np.isfinite(t):
        raise InvalidInputError(f"{name} must be finite, got {t}")
    return t


def loss_eval(loss, t):
    """Return ``(f(t), f'(t))`` for a scalar residual `t`."""
    t = _check_finite_scalar(t, "t")
    return float(loss.value(t)), float(loss.gradient(t))


def conjugate_eval(loss, xi):
    """Fenchel conjugate ``f*(xi)``; INFEASIBLE where it is ``+inf``."""
    xi = _check_finite_scalar(xi, "xi")
    return loss.conjugate_sum(np.array([xi]))


def residuals(data, B):
    """``t_i = y_i - <X_i, B>``."""
    return data.response - forward_apply(data, B)


def primal_objective(prob, B):
    """``sum_i f(y_i - <X_i, B>) + lam * ||B||_*``."""
    t = residuals(prob.data, B)
    return prob.loss.total(t) + prob.lam * nuclear_norm(B)
