"""Synthetic low-rank sensing data.

All randomness comes from ``numpy.random.Generator(numpy.random.Philox(seed))``
(the counter-based Philox-4x64 bit generator), so a seed fully determines a
dataset.  The shape itself is deterministic and uses no randomness.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .problem import Dataset

BLOCK_DIAGONAL = "block_diagonal"
CROSS_BARS = "cross_bars"
CUSTOM_GRID = "custom_grid"

GAUSSIAN = "gaussian"
STUDENT_T = "student_t"


@dataclass(frozen=True)
class ShapeSpec:
    kind: str = BLOCK_DIAGONAL
    p: int = 64
    q: int = 64
    target_rank: int = 4
    grid: str | None = None  # rows of '0'/'1' separated by '/' or newlines, custom_grid only


@dataclass(frozen=True)
class NoiseSpec:
    family: str = GAUSSIAN
    variance: float = 0.1
    dof: float = 3.0
    seed: int = 0

    def __post_init__(self):
        if self.family not in (GAUSSIAN, STUDENT_T):
            raise InvalidInputError(f"unknown noise family {self.family!r}")
        if self.family == GAUSSIAN and not self.variance >= 0:
            raise InvalidInputError("variance must be nonnegative")
        if self.family == STUDENT_T and not self.dof > 0:
            raise InvalidInputError("dof must be positive")


def make_rng(seed):
    return np.random.Generator(np.random.Philox(int(seed) & (2**64 - 1)))


def _segments(size, parts):
    edges = np.linspace(0, size, parts + 1).round().astype(int)
    return list(zip(edges[:-1], edges[1:]))


def _block_diagonal(p, q, r):
    B = np.zeros((p, q))
    for (r0, r1), (c0, c1) in zip(_segments(p, r), _segments(q, r)):
        # trim a margin so blocks read as separate shapes, but keep >= 1 cell
        mr, mc = (r1 - r0) // 4, (c1 - c0) // 4
        B[r0 + mr:r1 - mr, c0 + mc:c1 - mc] = 1.0
    return B


def _cross_bars(p, q, r):
    """A horizontal and a vertical band crossing (rank 2) plus ``r - 2`` corner blocks."""
    B = np.zeros((p, q))
    if r == 1:
        B[p // 3: p // 3 + max(1, p // 6), :] = 1.0
        return B
    extra = r - 2
    # bands live in the first half of the rows/columns, extra blocks in the
    # lower-right region that neither band touches
    band_r = slice(p // 8, p // 8 + max(1, p // 8))
    band_c = slice(q // 8, q // 8 + max(1, q // 8))
    B[band_r, :] = 1.0
    B[:, band_c] = 1.0
    if extra:
        r_start = band_r.stop + 1
        c_start = band_c.stop + 1
        rows = _segments(p - r_start, extra)
        cols = _segments(q - c_start, extra)
        for (r0, r1), (c0, c1) in zip(rows, cols):
            if r1 <= r0 or c1 <= c0:
                raise InvalidInputError(f"{p}x{q} is too small for a rank-{r} cross_bars shape")
            B[r_start + r0:r_start + r1, c_start + c0:c_start + c1] = 1.0
    return B


def parse_grid(text):
    rows = [row.strip() for row in text.replace("/", "\n").splitlines() if row.strip()]
    if not rows or any(len(row) != len(rows[0]) for row in rows):
        raise InvalidInputError("grid rows must be non-empty and of equal length")
    if any(ch not in "01" for row in rows for ch in row):
        raise InvalidInputError("grid may only contain '0' and '1'")
    return np.array([[float(ch) for ch in row] for row in rows])


def make_shape(spec):
    """Binary ``p x q`` matrix of exact rank ``spec.target_rank``."""
    from .solver import numerical_rank

    p, q, r = spec.p, spec.q, spec.target_rank
    if p < 1 or q < 1:
        raise InvalidInputError("shape dimensions must be positive")
    if not 0 <= r <= min(p, q):
        raise InvalidInputError(f"rank {r} is infeasible for a {p}x{q} matrix")
    if spec.kind == BLOCK_DIAGONAL:
        B = _block_diagonal(p, q, r) if r else np.zeros((p, q))
    elif spec.kind == CROSS_BARS:
        B = _cross_bars(p, q, r) if r else np.zeros((p, q))
    elif spec.kind == CUSTOM_GRID:
        if spec.grid is None:
            raise InvalidInputError("custom_grid needs a grid")
        B = parse_grid(spec.grid)
        if B.shape != (p, q):
            raise InvalidInputError(f"grid is {B.shape}, expected {(p, q)}")
    else:
        raise InvalidInputError(f"unknown shape kind {spec.kind!r}")
    got = numerical_rank(B, 1e-9)
    if got != r:
        raise InvalidInputError(f"{spec.kind} shape has rank {got}, expected {r}")
    return B


def sample_noise(rng, noise, n):
    if noise.family == GAUSSIAN:
        return np.sqrt(noise.variance) * rng.standard_normal(n)
    # t = z / sqrt(chi2_dof / dof)
    z = rng.standard_normal(n)
    chi2 = rng.chisquare(noise.dof, n)
    return z / np.sqrt(chi2 / noise.dof)


def sample_dataset(B_true, n, noise, seed=None):
    """Gaussian sensing matrices and ``y_i = <X_i, B_true> + eps_i``.

    The sensing matrices are drawn first, then the noise, from one generator
    seeded with `seed` (``noise.seed`` when omitted).
    """
    B_true = np.asarray(B_true, dtype=np.float64)
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    rng = make_rng(noise.seed if seed is None else seed)
    p, q = B_true.shape
    X = rng.standard_normal((n, p, q))
    eps = sample_noise(rng, noise, n)
    y = X.reshape(n, -1) @ B_true.ravel() + eps
    return Dataset(X, y)


def random_instance(seed, p, q, n, rank, noise_scale=0.1, loss_family="least_squares"):
    """Random low-rank instance with Gaussian factors, used by the property checks.

    Heavy-tailed ``t(3)`` noise is used for the Huber family.
    """
    rng = make_rng(seed)
    U = rng.standard_normal((p, rank))
    V = rng.standard_normal((q, rank))
    B = U @ V.T / np.sqrt(max(rank, 1))
    X = rng.standard_normal((n, p, q))
    if loss_family == "huber":
        eps = noise_scale * rng.standard_t(3, n)
    else:
        eps = noise_scale * rng.standard_normal(n)
    return Dataset(X, X.reshape(n, -1) @ B.ravel() + eps), B
