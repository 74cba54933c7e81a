"""Data ingestion, ranking under a tie policy, and pseudo-observations."""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from .errors import CsvParseError, DegenerateColumn, EvtestError, TiesDetected


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SampleMatrix:
    """Raw ``n x d`` observations (rows are observations)."""

    values: np.ndarray
    columns: tuple[str, ...] | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise EvtestError(f"expected a 2-d matrix, got shape {v.shape}")
        n, d = v.shape
        if n < 2 or d < 2:
            raise EvtestError(f"need n >= 2 and d >= 2, got n={n}, d={d}")
        if not np.all(np.isfinite(v)):
            i, j = np.argwhere(~np.isfinite(v))[0]
            raise EvtestError(f"non-finite entry at row {i}, column {j}")
        if self.columns is not None and len(self.columns) != d:
            raise EvtestError("column names do not match the number of columns")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def select(self, cols: Sequence[int | str]) -> "SampleMatrix":
        idx = []
        for c in cols:
            if isinstance(c, str) and not c.lstrip("-").isdigit():
                if self.columns is None or c not in self.columns:
                    raise EvtestError(f"unknown column {c!r}")
                idx.append(self.columns.index(c))
            else:
                k = int(c)
                if not 0 <= k < self.d:
                    raise EvtestError(f"column index {k} out of range")
                idx.append(k)
        names = None if self.columns is None else tuple(self.columns[k] for k in idx)
        return SampleMatrix(self.values[:, idx], names)


class TieKind(enum.Enum):
    NONE = "error"
    RANDOM = "random"
    MIDRANK = "midrank"


@dataclass(frozen=True)
class TiePolicy:
    kind: TieKind = TieKind.NONE
    seed: int = 0


@dataclass(frozen=True)
class PseudoObservations:
    """Rank-based pseudo-observations ``R / (n + 1)``.

    ``source_ranks`` is a float matrix so that mid-ranks fit; under the
    ``NONE`` and ``RANDOM`` policies every entry is integral.
    """

    u: np.ndarray
    source_ranks: np.ndarray
    tie_counts: tuple[int, ...] = ()
    warnings: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "u", _frozen(self.u))
        object.__setattr__(self, "source_ranks", _frozen(self.source_ranks))

    @property
    def n(self) -> int:
        return self.u.shape[0]

    @property
    def d(self) -> int:
        return self.u.shape[1]


def tie_counts(x: SampleMatrix) -> tuple[int, ...]:
    """Number of observations per column that share their value with another."""
    out = []
    for col in x.values.T:
        _, counts = np.unique(col, return_counts=True)
        out.append(int(counts[counts > 1].sum()))
    return tuple(out)


def _random_ranks(col: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    order = np.argsort(col, kind="stable")
    s = col[order]
    # start index of each run of equal values in the sorted column
    starts = np.flatnonzero(np.r_[True, s[1:] != s[:-1]])
    ends = np.r_[starts[1:], len(s)]
    for a, b in zip(starts, ends):
        if b - a > 1:
            order[a:b] = order[a:b][rng.permutation(b - a)]
    ranks = np.empty(len(col))
    ranks[order] = np.arange(1, len(col) + 1)
    return ranks


def compute_ranks(x: SampleMatrix, policy: TiePolicy = TiePolicy()) -> np.ndarray:
    """Columnwise ranks of ``x`` (1-based, float array).

    ``RANDOM`` breaks each tied block with a uniform permutation drawn from a
    generator seeded by ``(policy.seed, column index)``, so every column is
    reproducible on its own.
    """
    v = x.values
    ranks = np.empty_like(v)
    for j in range(x.d):
        col = v[:, j]
        if policy.kind is TieKind.NONE:
            if np.all(col == col[0]):
                raise DegenerateColumn(f"column {j} is constant")
            if len(np.unique(col)) < len(col):
                raise TiesDetected(f"column {j} contains tied values")
            ranks[:, j] = rankdata(col, method="ordinal")
        elif policy.kind is TieKind.MIDRANK:
            ranks[:, j] = rankdata(col, method="average")
        elif policy.kind is TieKind.RANDOM:
            ss = np.random.SeedSequence(policy.seed, spawn_key=(j,))
            ranks[:, j] = _random_ranks(col, np.random.default_rng(ss))
        else:  # pragma: no cover
            raise EvtestError(f"unknown tie policy {policy.kind}")
    return ranks


def pseudo_observations(ranks: np.ndarray, *, tie_counts: Sequence[int] = (),
                        warnings: Sequence[str] = ()) -> PseudoObservations:
    r = np.asarray(ranks, dtype=float)
    n = r.shape[0]
    if r.ndim != 2 or np.any(r < 1) or np.any(r > n):
        raise EvtestError("ranks must form an n x d matrix with entries in [1, n]")
    return PseudoObservations(r / (n + 1), r, tuple(tie_counts), tuple(warnings))


def to_pseudo(x: SampleMatrix, policy: TiePolicy = TiePolicy()) -> PseudoObservations:
    """Ranks plus pseudo-observations, with warnings for ties and constant columns."""
    ties = tie_counts(x)
    warns = []
    for j in range(x.d):
        if np.all(x.values[:, j] == x.values[0, j]) and policy.kind is not TieKind.NONE:
            warns.append(f"column {j} is constant; the test is not informative")
    if any(ties) and policy.kind is not TieKind.NONE:
        warns.append(f"ties present (per-column counts {list(ties)}); "
                     f"ranks computed with policy {policy.kind.value}")
    return pseudo_observations(compute_ranks(x, policy), tie_counts=ties, warnings=warns)


def _looks_numeric(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def read_csv(path: str | Path, delimiter: str = ",") -> SampleMatrix:
    """Read a numeric CSV file; the first row is a header if any field is non-numeric."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh, delimiter=delimiter)]
    rows = [(i + 1, r) for i, r in enumerate(rows) if any(f.strip() for f in r)]
    if not rows:
        raise CsvParseError("empty file")
    header = None
    first = rows[0][1]
    if not all(_looks_numeric(f.strip()) for f in first):
        header = tuple(f.strip() for f in first)
        rows = rows[1:]
    if not rows:
        raise CsvParseError("no data rows")
    width = len(header) if header is not None else len(rows[0][1])
    data = np.empty((len(rows), width))
    for k, (lineno, fields) in enumerate(rows):
        if len(fields) != width:
            raise CsvParseError(f"expected {width} fields, found {len(fields)}", row=lineno)
        for j, f in enumerate(fields):
            try:
                val = float(f.strip())
            except ValueError:
                raise CsvParseError(f"cannot parse {f!r} as a number",
                                    row=lineno, column=j + 1) from None
            if not np.isfinite(val):
                raise CsvParseError(f"non-finite value {f!r}", row=lineno, column=j + 1)
            data[k, j] = val
    return SampleMatrix(data, header)
