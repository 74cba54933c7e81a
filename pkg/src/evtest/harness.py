"""Level/power experiments: repeated sampling, testing and rejection-rate tables."""

from __future__ import annotations

import configparser
import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .copulas import CopulaModel, Family, sample, tau_to_param
from .data import SampleMatrix, TiePolicy, to_pseudo
from .errors import ConfigError, EvtestError
from .maxstable import TestConfig, format_r, run_test

# halved grid axes for quick runs; the trivariate value follows the acceptance settings
DESK_GRID = {2: 22, 3: 9, 4: 4, 5: 3}
DESK_REPS = 500
DESK_MULTIPLIERS = 250


@dataclass(frozen=True)
class ExperimentSpec:
    model: CopulaModel
    n: int
    reps: int = DESK_REPS
    cfg: TestConfig = TestConfig(n_multipliers=DESK_MULTIPLIERS)
    level: float = 0.05
    root_seed: int = 0
    tau: float | None = None

    def __post_init__(self):
        if self.reps < 1:
            raise EvtestError("reps must be >= 1")
        if not 0 < self.level < 1:
            raise EvtestError("level must lie in (0, 1)")
        if self.n < 2:
            raise EvtestError("n must be >= 2")

    @property
    def dependence(self) -> str:
        """Row label for the dependence strength: tau, lambda or theta."""
        if self.model.family is Family.KHOUDRAJI_GH:
            return "lambda=" + ",".join(f"{x:g}" for x in self.model.lam)
        if self.tau is not None:
            return f"tau={self.tau:g}"
        if self.model.family in (Family.INDEPENDENCE, Family.COMONOTONE):
            return "-"
        return f"theta={self.model.theta:.6g}"


@dataclass(frozen=True)
class ExperimentResult:
    spec: ExperimentSpec
    labels: tuple[str, ...]
    p_values: np.ndarray  # reps x labels

    def rejections(self, label: str | None = None) -> int:
        k = self._col(label)
        return int(np.count_nonzero(self.p_values[:, k] <= self.spec.level))

    def rate(self, label: str | None = None) -> float:
        return self.rejections(label) / self.spec.reps

    def se(self, label: str | None = None) -> float:
        p = self.rate(label)
        return math.sqrt(p * (1.0 - p) / self.spec.reps)

    @property
    def main_label(self) -> str:
        return self.labels[-1]

    def _col(self, label):
        return len(self.labels) - 1 if label is None else self.labels.index(label)


def rep_seeds(root_seed: int, rep: int) -> tuple[int, int]:
    """(sampling seed, multiplier seed) for one replication."""
    ss = np.random.SeedSequence(root_seed, spawn_key=(rep,))
    a, b = ss.generate_state(2)
    return int(a), int(b)


def _one_rep(args):
    spec, rep = args
    s_seed, m_seed = rep_seeds(spec.root_seed, rep)
    x = SampleMatrix(sample(spec.model, spec.n, s_seed))
    res = run_test(to_pseudo(x, TiePolicy()), replace(spec.cfg, seed=m_seed))
    # one table cell per configured statistic; single-r cells come from r = <value> specs
    stats = res.combined
    return tuple(s.label for s in stats), [s.p_value for s in stats]


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> ExperimentResult:
    """Sample, rank, test and record p-values for every replication.

    Each replication derives its own seeds from ``(root_seed, rep)``, so the
    result does not depend on ``workers``.
    """
    jobs = [(spec, k) for k in range(spec.reps)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            out = list(ex.map(_one_rep, jobs, chunksize=max(1, spec.reps // (4 * workers))))
    else:
        out = [_one_rep(j) for j in jobs]
    labels = out[0][0]
    return ExperimentResult(spec, labels, np.array([p for _, p in out]))


# ---------------------------------------------------------------------------
# tables

TABLE_FIELDS = ["family", "dependence", "d", "n", "statistic", "reps", "N", "g",
                "seed", "rejections", "rate", "se"]


@dataclass(frozen=True)
class Cell:
    family: str
    dependence: str
    d: int
    n: int
    statistic: str
    reps: int
    N: int
    g: int
    seed: int
    rejections: int

    @property
    def key(self):
        return (self.family, self.dependence, self.d, self.n, self.statistic)

    @property
    def rate(self) -> float:
        return 100.0 * self.rejections / self.reps

    @property
    def se(self) -> float:
        p = self.rejections / self.reps
        return 100.0 * math.sqrt(p * (1.0 - p) / self.reps)


@dataclass(frozen=True)
class RejectionTable:
    cells: tuple[Cell, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TABLE_FIELDS)
        for c in self.cells:
            w.writerow([c.family, c.dependence, c.d, c.n, c.statistic, c.reps, c.N, c.g,
                        c.seed, c.rejections, f"{c.rate:.1f}", f"{c.se:.2f}"])
        return buf.getvalue()

    def to_text(self) -> str:
        head = ["family", "dependence", "d", "n", "statistic", "rate (%)", "se", "reps", "N", "g", "seed"]
        rows = [[c.family, c.dependence, str(c.d), str(c.n), c.statistic, f"{c.rate:.1f}",
                 f"{c.se:.2f}", str(c.reps), str(c.N), str(c.g), str(c.seed)] for c in self.cells]
        widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
                  for i, h in enumerate(head)]
        lines = ["  ".join(h.rjust(w) for h, w in zip(head, widths))]
        lines.append("  ".join("-" * w for w in widths))
        lines.extend("  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in rows)
        return "\n".join(lines) + "\n"


def emit_table(results) -> RejectionTable:
    """One cell per (experiment, statistic label); duplicate keys are an error."""
    cells, seen = [], set()
    for res in results:
        sp = res.spec
        for lab in res.labels:
            cell = Cell(sp.model.family.value, sp.dependence, sp.model.d, sp.n, lab, sp.reps,
                        sp.cfg.n_multipliers, sp.cfg.grid_for(sp.model.d), sp.root_seed,
                        res.rejections(lab))
            if cell.key in seen:
                raise EvtestError(f"duplicate table cell {cell.key}")
            seen.add(cell.key)
            cells.append(cell)
    return RejectionTable(tuple(cells))


# ---------------------------------------------------------------------------
# experiment config files

BUNDLED = ("table1-desk", "table2-desk", "table3-desk", "paper-scale")


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.replace(";", ",").split(",") if t.strip()]


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def specs_from_config(text: str) -> list[ExperimentSpec]:
    """Parse INI-style key-value text; each section is one cell (``n`` may list several sizes).

    Keys: family, tau | theta | lambda, d, n, reps, N, g, seed, statistic, r,
    level, rescale, multipliers.
    """
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed experiment config: {exc}") from None
    specs = []
    for name in cp.sections():
        sec = cp[name]
        try:
            specs.extend(_section_specs(sec))
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"section [{name}]: {exc}") from None
    if not specs:
        raise ConfigError("experiment config defines no cells")
    return specs


def _section_specs(sec) -> list[ExperimentSpec]:
    known = {"family", "tau", "theta", "lambda", "d", "n", "reps", "N", "g", "seed",
             "statistic", "r", "level", "rescale", "multipliers"}
    unknown = set(sec.keys()) - known
    if unknown:
        raise ValueError(f"unknown keys {sorted(unknown)}")
    fam = Family.parse(sec["family"])
    d = int(sec.get("d", "2"))
    tau = None
    lam = None
    if fam is Family.KHOUDRAJI_GH:
        lam = tuple(_floats(sec["lambda"]))
        d = len(lam)
        theta = float(sec.get("theta", "4"))
    elif "tau" in sec:
        tau = float(sec["tau"])
        theta = tau_to_param(fam, tau)
    elif "theta" in sec:
        theta = float(sec["theta"])
    else:
        theta = float("nan")
    model = CopulaModel(fam, d, theta, lam)
    g = sec.get("g")
    cfg = TestConfig(
        r_set=tuple(_floats(sec.get("r", "3,4,5"))),
        n_multipliers=int(sec.get("N", str(DESK_MULTIPLIERS))),
        grid_per_axis=int(g) if g else DESK_GRID.get(d),
        rescale=_bool(sec.get("rescale", "on")),
        statistic=sec.get("statistic", "T").strip().upper(),
        multiplier_law=sec.get("multipliers", "normal").strip().lower(),
    )
    out = []
    for n in _floats(sec["n"]):
        out.append(ExperimentSpec(model, int(n), int(sec.get("reps", str(DESK_REPS))), cfg,
                                  float(sec.get("level", "0.05")), int(sec.get("seed", "0")), tau))
    return out


def load_config(source: str | Path) -> tuple[str, list[ExperimentSpec]]:
    """Read a config file, or one of the bundled names; returns (stem, specs)."""
    name = str(source)
    if name in BUNDLED and not Path(name).exists():
        text = resources.files("evtest.specs").joinpath(f"{name}.ini").read_text()
        return name, specs_from_config(text)
    try:
        text = Path(source).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read experiment config {name}: {exc.strerror}") from None
    return Path(source).stem, specs_from_config(text)


def run_specs(specs, workers: int = 1) -> RejectionTable:
    return emit_table([run_experiment(s, workers) for s in specs])


__all__ = [
    "ExperimentSpec", "ExperimentResult", "RejectionTable", "Cell", "run_experiment",
    "emit_table", "specs_from_config", "load_config", "run_specs", "rep_seeds", "format_r",
]
