"""Max-stability test statistics with multiplier-bootstrap p-values.

For ``r >= 1`` the observed process is

    D(u) = sqrt(n) * [ {c C_n(u^(1/r))}^r - c C_n(u) ],   c = n / (n + 0.85) or 1,

and each multiplier replicate evaluates ``n^-1/2 * (Z - mean(Z)) @ M`` where
``M`` is the ``n x m`` influence matrix. Cramer-von Mises statistics average
the squared process over a grid (``S``) or over the pseudo-observations
themselves (``T``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .data import PseudoObservations
from .empirical import EmpiricalCopula, EvalGrid, check_exponent, make_grid
from .errors import EvtestError

RESCALE_OFFSET = 0.85
DEFAULT_GRID = {2: 44, 3: 13, 4: 7, 5: 5}

Statistic = Literal["S", "T", "BOTH"]
MultiplierLaw = Literal["normal", "rademacher"]


def default_grid(d: int) -> int:
    if d in DEFAULT_GRID:
        return DEFAULT_GRID[d]
    return max(2, int(3125 ** (1.0 / d)))


def rescale_constant(n: int, enabled: bool = True) -> float:
    return n / (n + RESCALE_OFFSET) if enabled else 1.0


def format_r(r_set) -> str:
    return ",".join(f"{r:g}" for r in r_set)


@dataclass(frozen=True)
class TestConfig:
    r_set: tuple[float, ...] = (3.0, 4.0, 5.0)
    n_multipliers: int = 1000
    grid_per_axis: int | None = None
    rescale: bool = True
    statistic: Statistic = "T"
    multiplier_law: MultiplierLaw = "normal"
    seed: int = 0

    # not a pytest class
    __test__ = False

    def __post_init__(self):
        rs = tuple(check_exponent(r) for r in self.r_set)
        if not rs:
            raise EvtestError("r_set must not be empty")
        object.__setattr__(self, "r_set", rs)
        if self.n_multipliers < 1:
            raise EvtestError("the number of multiplier replicates must be >= 1")
        if self.grid_per_axis is not None and self.grid_per_axis < 1:
            raise EvtestError("grid_per_axis must be >= 1")
        if self.statistic not in ("S", "T", "BOTH"):
            raise EvtestError(f"unknown statistic {self.statistic!r}")
        if self.multiplier_law not in ("normal", "rademacher"):
            raise EvtestError(f"unknown multiplier law {self.multiplier_law!r}")

    @property
    def kinds(self) -> tuple[str, ...]:
        return ("S", "T") if self.statistic == "BOTH" else (self.statistic,)

    def grid_for(self, d: int) -> int:
        return self.grid_per_axis if self.grid_per_axis is not None else default_grid(d)

    def as_dict(self) -> dict:
        return {
            "r_set": list(self.r_set),
            "n_multipliers": self.n_multipliers,
            "grid_per_axis": self.grid_per_axis,
            "rescale": self.rescale,
            "statistic": self.statistic,
            "multiplier_law": self.multiplier_law,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class MultiplierWeights:
    z: np.ndarray
    centered: np.ndarray

    @property
    def N(self) -> int:
        return self.z.shape[0]

    @property
    def n(self) -> int:
        return self.z.shape[1]

    @classmethod
    def from_matrix(cls, z) -> "MultiplierWeights":
        z = np.atleast_2d(np.asarray(z, dtype=float))
        return cls(z, z - z.mean(axis=1, keepdims=True))


def draw_multipliers(n: int, N: int, law: MultiplierLaw = "normal", seed: int = 0) -> MultiplierWeights:
    """``N x n`` i.i.d. mean-zero unit-variance weights from a single seeded stream."""
    if n < 1 or N < 1:
        raise EvtestError("n and N must be >= 1")
    rng = np.random.default_rng(seed)
    if law == "normal":
        z = rng.standard_normal((N, n))
    elif law == "rademacher":
        z = 2.0 * rng.integers(0, 2, size=(N, n)) - 1.0
    else:
        raise EvtestError(f"unknown multiplier law {law!r}")
    return MultiplierWeights.from_matrix(z)


@dataclass(frozen=True)
class InfluenceMatrix:
    entries: np.ndarray
    r: float
    eval_points: str = "grid"


def process_d(ec: EmpiricalCopula, r: float, u, rescale_c: float = 1.0):
    """Observed max-stability process at one point or a batch of points."""
    r = check_exponent(r)
    p = np.asarray(u, dtype=float)
    c = float(rescale_c)
    v = math.sqrt(ec.n) * ((c * ec(p ** (1.0 / r))) ** r - c * ec(p))
    return v


def _bracket(ec: EmpiricalCopula, points: np.ndarray):
    """``C_n`` at the points and the ``n x m`` matrix
    ``1(U_i <= w) - sum_l C_n^[l](w) 1(U_il <= w_l)``."""
    below = ec.u[:, None, :] <= points[None, :, :]
    joint = np.all(below, axis=2)
    cn = joint.sum(axis=0) / ec.n
    grad = ec.gradient(points)
    return cn, joint - np.einsum("iml,ml->im", below, grad)


def _influence(r: float, base, powered) -> np.ndarray:
    _, b_w = base
    cn_r, b_r = powered
    return r * cn_r ** (r - 1.0) * b_r - b_w


def build_influence_matrix(ec: EmpiricalCopula, r: float, points, eval_points: str = "grid") -> InfluenceMatrix:
    r = check_exponent(r)
    p = np.atleast_2d(np.asarray(points, dtype=float))
    m = _influence(r, _bracket(ec, p), _bracket(ec, p ** (1.0 / r)))
    return InfluenceMatrix(m, r, eval_points)


def replicate_statistics(M: InfluenceMatrix | np.ndarray, W: MultiplierWeights) -> np.ndarray:
    """Mean squared replicate process over the evaluation points, one value per row of ``W``."""
    entries = M.entries if isinstance(M, InfluenceMatrix) else np.asarray(M)
    if entries.shape[0] != W.n:
        raise EvtestError(f"influence matrix has {entries.shape[0]} rows, weights have n={W.n}")
    proc = (W.centered @ entries) / math.sqrt(W.n)
    return np.mean(proc ** 2, axis=1)


def statistic_S(ec: EmpiricalCopula, r: float, grid: EvalGrid, rescale_c: float = 1.0) -> float:
    d = process_d(ec, r, grid.points, rescale_c)
    return float(np.mean(d ** 2))


def statistic_T(ec: EmpiricalCopula, r: float, rescale_c: float = 1.0) -> float:
    d = process_d(ec, r, ec.u, rescale_c)
    return float(np.mean(d ** 2))


def p_value(observed: float, replicates) -> float:
    reps = np.asarray(replicates)
    if reps.size < 1:
        raise EvtestError("need at least one replicate")
    return int(np.count_nonzero(reps >= observed)) / reps.size


@dataclass(frozen=True)
class StatisticResult:
    kind: str
    r_set: tuple[float, ...]
    value: float
    replicates: np.ndarray
    p_value: float

    @property
    def label(self) -> str:
        return f"{self.kind}[{format_r(self.r_set)}]"


@dataclass(frozen=True)
class TestResult:
    per_r: tuple[StatisticResult, ...]
    combined: tuple[StatisticResult, ...]
    config: TestConfig
    n: int
    d: int
    warnings: tuple[str, ...] = field(default=())

    __test__ = False

    @property
    def seed(self) -> int:
        return self.config.seed

    def results(self) -> tuple[StatisticResult, ...]:
        """Per-r results followed by the combined statistic, grouped by kind."""
        out = []
        for comb in self.combined:
            out.extend(s for s in self.per_r if s.kind == comb.kind)
            out.append(comb)
        return tuple(out)

    def get(self, kind: str = "T", r: float | None = None) -> StatisticResult:
        if r is None:
            return next(s for s in self.combined if s.kind == kind)
        return next(s for s in self.per_r if s.kind == kind and s.r_set == (float(r),))


def run_test(pseudo: PseudoObservations, cfg: TestConfig = TestConfig(),
             weights: MultiplierWeights | None = None) -> TestResult:
    """Run the multiplier test for every ``r`` in ``cfg.r_set``.

    A single set of multiplier weights is shared by all exponents and both
    statistic kinds so that the replicates of the combined statistic are
    sums of jointly generated components.
    """
    ec = EmpiricalCopula(pseudo)
    n, d = ec.n, ec.d
    if weights is None:
        weights = draw_multipliers(n, cfg.n_multipliers, cfg.multiplier_law, cfg.seed)
    elif weights.n != n:
        raise EvtestError("multiplier weights do not match the sample size")
    c = rescale_constant(n, cfg.rescale)
    per_r, combined = [], []
    for kind in cfg.kinds:
        if kind == "S":
            grid = make_grid(d, cfg.grid_for(d), cfg.r_set)
            points, powered_pts = grid.points, grid.power
        else:
            points = pseudo.u
            powered_pts = lambda r, p=points: p ** (1.0 / r)  # noqa: E731
        base = _bracket(ec, points)
        total, total_reps = 0.0, np.zeros(weights.N)
        for r in cfg.r_set:
            pr = powered_pts(r)
            powered = _bracket(ec, pr)
            m = _influence(r, base, powered)
            dv = math.sqrt(n) * ((c * powered[0]) ** r - c * base[0])
            value = float(np.mean(dv ** 2))
            reps = replicate_statistics(m, weights)
            per_r.append(StatisticResult(kind, (r,), value, reps, p_value(value, reps)))
            total = total + value
            total_reps = total_reps + reps
        combined.append(StatisticResult(kind, cfg.r_set, total, total_reps, p_value(total, total_reps)))
    return TestResult(tuple(per_r), tuple(combined), cfg, n, d, pseudo.warnings)
