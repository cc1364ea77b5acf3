"""Lambda-sweep experiments: config parsing and the sweep driver.

Config files are INI-style key/value text, e.g.::

    [shape]
    kind = block_diagonal
    p = 64
    q = 64
    rank = 4

    [data]
    n = 500
    seed = 1

    [noise]
    family = gaussian
    variance = 0.1

    [loss]
    family = least_squares

    [sweep]
    fractions = 0.05:1.0:0.05

Every section and key is optional; see :class:`ExperimentConfig` for defaults.
"""

import configparser
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .datagen import NoiseSpec, ShapeSpec, make_shape, sample_dataset
from .errors import ConfigError, DegenerateProblemError
from .problem import DEFAULT_KAPPA, HUBER, LEAST_SQUARES, LossModel, NrmProblem
from .selection import (
    DEFAULT_RULE, EMPTY, RADIUS_RULES, LambdaSequence, rank_bound_for_lambda, select,
)
from .solver import SolverOptions, lipschitz_estimate, numerical_rank, solve_nrm

LOSS_ALIASES = {"ls": LEAST_SQUARES, "least_squares": LEAST_SQUARES, "huber": HUBER}


@dataclass(frozen=True)
class SweepSpec:
    """Either absolute `lambdas` or `fractions` of lambda_max."""

    lambdas: tuple = ()
    fractions: tuple = ()

    def values(self, lmax):
        vals = list(self.lambdas) + [f * lmax for f in self.fractions]
        if any(not v > 0 for v in vals):
            raise ConfigError("sweep values must be positive")
        return sorted(set(vals), reverse=True)


@dataclass(frozen=True)
class ExperimentConfig:
    shape: ShapeSpec = field(default_factory=ShapeSpec)
    n: int = 500
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    loss: LossModel = field(default_factory=LossModel)
    sweep: SweepSpec = field(default_factory=lambda: SweepSpec(fractions=_frange(0.05, 1.0, 0.05)))
    solver: SolverOptions = field(default_factory=SolverOptions)
    rule: str = DEFAULT_RULE
    rank_tol: float = 1e-6
    timing: bool = False
    out_csv: str | None = None
    out_svg: str | None = None

    @property
    def seed(self):
        return self.noise.seed


@dataclass(frozen=True)
class SweepRow:
    lam: float
    certified_bound: int | None
    solved_rank: int
    final_gap: float
    objective: float
    seconds: float | None = None
    converged: bool = True

    @property
    def sound(self):
        """False only for a converged row whose rank exceeds its certificate."""
        if self.certified_bound is None or not self.converged:
            return True
        return self.solved_rank <= self.certified_bound


@dataclass
class SweepResult:
    lambda_max: float
    sequence: LambdaSequence | None
    rows: list
    loss: LossModel
    rule: str
    gap_tolerance: float

    def header_items(self):
        seq = ""
        if self.sequence is not None:
            parts = []
            for e in self.sequence.entries:
                if e.kind == EMPTY:
                    continue
                hi = "" if e.upper is None else repr(e.upper)
                parts.append(f"{e.k}:{e.kind}:{e.lower!r}:{hi}")
            seq = ";".join(parts)
        return [
            ("loss", self.loss.family),
            ("kappa", repr(self.loss.kappa)),
            ("rule", self.rule),
            ("gap_tolerance", repr(self.gap_tolerance)),
            ("lambda_max", repr(self.lambda_max)),
            ("lambda_k", seq),
        ]

    def boundaries(self):
        """``(label, value)`` pairs for every finite positive sequence endpoint."""
        out = []
        if self.sequence is None:
            return out
        for e in self.sequence.entries:
            for v in e.boundaries():
                out.append((f"lambda_{e.k}", v))
        return out


def _frange(start, stop, step):
    if step <= 0:
        raise ConfigError("fraction step must be positive")
    count = int(round((stop - start) / step)) + 1
    return tuple(round(start + i * step, 12) for i in range(max(count, 0)))


def _parse_list(text):
    text = text.strip()
    if not text:
        return ()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"range must be start:stop:step, got {text!r}")
        return _frange(*(float(x) for x in parts))
    return tuple(float(x) for x in text.replace(",", " ").split())


def parse_config(text):
    """Parse config text into an :class:`ExperimentConfig`."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    known = {"shape", "data", "noise", "loss", "sweep", "solver", "output"}
    unknown = set(cp.sections()) - known
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    def get(section, key, conv=str, default=None):
        if not cp.has_option(section, key):
            return default
        raw = cp.get(section, key)
        try:
            return conv(raw)
        except ValueError:
            raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from None

    def boolean(s):
        s = s.strip().lower()
        if s in ("1", "true", "yes", "on"):
            return True
        if s in ("0", "false", "no", "off"):
            return False
        raise ValueError(s)

    base = ExperimentConfig()
    shape = ShapeSpec(
        kind=get("shape", "kind", str, base.shape.kind),
        p=get("shape", "p", int, base.shape.p),
        q=get("shape", "q", int, base.shape.q),
        target_rank=get("shape", "rank", int, base.shape.target_rank),
        grid=get("shape", "grid", str, None),
    )
    noise = NoiseSpec(
        family=get("noise", "family", str, base.noise.family),
        variance=get("noise", "variance", float, base.noise.variance),
        dof=get("noise", "dof", float, base.noise.dof),
        seed=get("data", "seed", int, base.noise.seed),
    )
    family = get("loss", "family", str, LEAST_SQUARES)
    if family not in LOSS_ALIASES:
        raise ConfigError(f"unknown loss family {family!r}")
    loss = LossModel(LOSS_ALIASES[family], kappa=get("loss", "kappa", float, DEFAULT_KAPPA))
    lambdas = get("sweep", "lambdas", _parse_list, ())
    fractions = get("sweep", "fractions", _parse_list, None)
    if fractions is None:
        fractions = () if lambdas else base.sweep.fractions
    rule = get("sweep", "rule", str, DEFAULT_RULE)
    if rule not in RADIUS_RULES:
        raise ConfigError(f"unknown radius rule {rule!r}")
    solver = SolverOptions(
        max_iterations=get("solver", "max_iterations", int, base.solver.max_iterations),
        gap_tolerance=get("solver", "gap_tolerance", float, base.solver.gap_tolerance),
        step_rule=get("solver", "step_rule", str, base.solver.step_rule),
        restart=get("solver", "restart", boolean, base.solver.restart),
    )
    return ExperimentConfig(
        shape=shape, n=get("data", "n", int, base.n), noise=noise, loss=loss,
        sweep=SweepSpec(lambdas=lambdas, fractions=fractions), solver=solver, rule=rule,
        rank_tol=get("solver", "rank_tol", float, base.rank_tol),
        timing=get("output", "timing", boolean, False),
        out_csv=get("output", "csv", str, None), out_svg=get("output", "svg", str, None),
    )


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def generate_dataset(cfg):
    return sample_dataset(make_shape(cfg.shape), cfg.n, cfg.noise)


def _sweep_point(args):
    data, loss, lam, seq, solver, rank_tol, lipschitz, timing = args
    start = time.perf_counter()
    sol = solve_nrm(NrmProblem(data, loss, lam), solver, lipschitz=lipschitz)
    elapsed = time.perf_counter() - start
    cert = rank_bound_for_lambda(seq, lam) if seq is not None else None
    return SweepRow(
        lam=float(lam),
        certified_bound=None if cert is None else cert.bound,
        solved_rank=numerical_rank(sol.B, rank_tol),
        final_gap=sol.final_gap,
        objective=sol.objective,
        seconds=elapsed if timing else None,
        converged=sol.converged,
    )


def run_sweep(cfg, data=None, jobs=1):
    """Certify and solve at every sweep value; rows come back sorted by decreasing lambda.

    Parameters
    ----------
    cfg : ExperimentConfig
    data : Dataset, optional
        Use this dataset instead of generating one from `cfg`.
    jobs : int
        Worker processes for the per-lambda solves.  Results do not depend on it.
    """
    if data is None:
        data = generate_dataset(cfg)
    try:
        coef, seq = select(data, cfg.loss, cfg.rule)
        lmax = coef.lambda_max
    except DegenerateProblemError:
        seq, lmax = None, 0.0
    if lmax > 0:
        lams = cfg.sweep.values(lmax)
    else:
        lams = SweepSpec(lambdas=cfg.sweep.lambdas).values(lmax)
    result = SweepResult(lambda_max=lmax, sequence=seq, rows=[], loss=cfg.loss,
                         rule=cfg.rule, gap_tolerance=cfg.solver.gap_tolerance)
    if not lams:
        return result
    lipschitz = lipschitz_estimate(data)
    tasks = [(data, cfg.loss, lam, seq, cfg.solver, cfg.rank_tol, lipschitz, cfg.timing)
             for lam in lams]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_point, tasks))
    else:
        rows = [_sweep_point(t) for t in tasks]
    result.rows = sorted(rows, key=lambda r: -r.lam)
    return result


def rank_monotone(rows):
    """True when solved rank never increases as lambda increases."""
    ordered = sorted(rows, key=lambda r: r.lam)
    return all(b.solved_rank <= a.solved_rank for a, b in zip(ordered, ordered[1:]))


def with_overrides(cfg, loss=None, kappa=None, seed=None, out_csv=None, out_svg=None, rule=None):
    """Apply command-line overrides to a config."""
    if loss is not None or kappa is not None:
        family = LOSS_ALIASES[loss] if loss is not None else cfg.loss.family
        cfg = replace(cfg, loss=LossModel(family, kappa=cfg.loss.kappa if kappa is None else kappa))
    if seed is not None:
        cfg = replace(cfg, noise=replace(cfg.noise, seed=seed))
    if out_csv is not None:
        cfg = replace(cfg, out_csv=out_csv)
    if out_svg is not None:
        cfg = replace(cfg, out_svg=out_svg)
    if rule is not None:
        cfg = replace(cfg, rule=rule)
    return cfg
