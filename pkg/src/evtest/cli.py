"""Command-line front end.

    evtest test data.csv [--ties random --repeats 100 ...]
    evtest simulate table2-desk [--workers 4 --out-dir results/]
    evtest sample GH --tau 0.5 --n 400 -o gh.csv
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .copulas import CopulaModel, Family, sample
from .data import SampleMatrix, TieKind, TiePolicy, read_csv, tie_counts, to_pseudo
from .errors import ConfigError, EvtestError
from .harness import load_config, run_specs
from .maxstable import DEFAULT_GRID, TestConfig, run_test

EXIT_OK, EXIT_INPUT, EXIT_CONFIG = 0, 2, 3


class InputError(EvtestError):
    pass


@dataclass
class CliReport:
    n: int
    d: int
    columns: list | None
    ties: str
    tie_counts: list[int]
    config: dict
    results: list[dict]
    seeds: list[dict]
    repeats: dict | None = None
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps({
            "n": self.n, "d": self.d, "columns": self.columns, "ties": self.ties,
            "tie_counts": self.tie_counts, "config": self.config, "results": self.results,
            "seeds": self.seeds, "repeats": self.repeats, "warnings": self.warnings,
        }, indent=2)

    def to_text(self) -> str:
        out = [f"n = {self.n}, d = {self.d}, ties = {self.ties}, tie counts = {self.tie_counts}"]
        if self.columns:
            out.append(f"columns: {', '.join(self.columns)}")
        out.append("config: " + ", ".join(f"{k}={v}" for k, v in self.config.items()))
        for s in self.seeds:
            out.append(f"seeds: repeat {s['repeat']} ties={s['ties']} multipliers={s['multipliers']}")
        for r in self.results:
            out.append(f"repeat {r['repeat']}  {r['label']:<14} value = {r['value']!r}  "
                       f"p_value = {r['p_value']!r}")
        if self.repeats:
            out.append(f"summary over {self.repeats['k']} tie randomizations:")
            for lab in self.repeats["min"]:
                out.append(f"  {lab:<14} min = {self.repeats['min'][lab]!r}  "
                           f"median = {self.repeats['median'][lab]!r}  max = {self.repeats['max'][lab]!r}")
        for w in self.warnings:
            out.append(f"warning: {w}")
        return "\n".join(out) + "\n"


def repeat_seeds(seed: int, k: int) -> tuple[int, int]:
    """(tie-breaking seed, multiplier seed) for tie-randomization repeat ``k``."""
    a, b = np.random.SeedSequence(seed, spawn_key=(k,)).generate_state(2)
    return int(a), int(b)


def _one_repeat(args):
    x, kind, cfg, seed, k = args
    t_seed, m_seed = repeat_seeds(seed, k)
    pseudo = to_pseudo(x, TiePolicy(kind, t_seed))
    res = run_test(pseudo, replace(cfg, seed=m_seed))
    rows = [{"repeat": k, "r_set": list(s.r_set), "statistic": s.kind, "label": s.label,
             "value": s.value, "p_value": s.p_value} for s in res.results()]
    return rows, {"repeat": k, "ties": t_seed, "multipliers": m_seed}, list(res.warnings)


def cmd_test(x: SampleMatrix, cfg: TestConfig, ties: TieKind = TieKind.RANDOM,
             repeats: int = 100, seed: int = 0, workers: int = 1) -> CliReport:
    """Test a data set; with random tie-breaking and actual ties, repeat ``repeats`` times.

    No accept/reject verdict is produced; the spread of p-values is reported.
    """
    counts = list(tie_counts(x))
    k_runs = repeats if ties is TieKind.RANDOM and any(counts) else 1
    if k_runs < 1:
        raise ConfigError("--repeats must be >= 1")
    jobs = [(x, ties, cfg, seed, k) for k in range(k_runs)]
    if workers > 1 and k_runs > 1:
        with ProcessPoolExecutor(workers) as ex:
            outs = list(ex.map(_one_repeat, jobs))
    else:
        outs = [_one_repeat(j) for j in jobs]
    results = [row for rows, _, _ in outs for row in rows]
    seeds = [s for _, s, _ in outs]
    warns = list(outs[0][2])
    if ties is TieKind.RANDOM and not any(counts):
        warns.append("no ties found; a single test run was performed")
    summary = None
    if k_runs > 1:
        labels = [r["label"] for r in outs[0][0]]
        pv = {lab: [r["p_value"] for r in results if r["label"] == lab] for lab in labels}
        summary = {"k": k_runs,
                   "min": {lab: float(np.min(v)) for lab, v in pv.items()},
                   "median": {lab: float(np.median(v)) for lab, v in pv.items()},
                   "max": {lab: float(np.max(v)) for lab, v in pv.items()}}
    config = cfg.as_dict()
    config.update(seed=seed, ties=ties.value, repeats=k_runs)
    return CliReport(x.n, x.d, list(x.columns) if x.columns else None, ties.value, counts,
                     config, results, seeds, summary, warns)


def cmd_simulate(config: str, workers: int = 1, out_dir: str | Path = ".",
                 reps: int | None = None, paper_scale: bool = False):
    stem, specs = load_config(config)
    if paper_scale:
        specs = [replace(s, reps=1000, cfg=replace(s.cfg, n_multipliers=1000,
                                                   grid_per_axis=DEFAULT_GRID.get(s.model.d)))
                 for s in specs]
    if reps is not None:
        specs = [replace(s, reps=reps) for s in specs]
    table = run_specs(specs, workers)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{stem}.csv").write_text(table.to_csv())
    (out / f"{stem}.txt").write_text(table.to_text())
    return table


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="evtest", description="Tests of extreme-value (max-stable) copula dependence.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("test", help="test a CSV data set")
    t.add_argument("csv")
    t.add_argument("--cols", help="comma-separated column names or 0-based indices")
    t.add_argument("--delimiter", default=",")
    t.add_argument("--r", type=_floats, default=(3.0, 4.0, 5.0))
    t.add_argument("--N", type=int, default=None,
                   help="multiplier replicates (default 1000, 10000 with mid-ranks)")
    t.add_argument("--grid", type=int, default=None, help="grid points per axis for S")
    t.add_argument("--stat", choices=["S", "T", "both"], default="T")
    t.add_argument("--ties", choices=[k.value for k in TieKind], default="random")
    t.add_argument("--repeats", type=int, default=100)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--multipliers", choices=["normal", "rademacher"], default="normal")
    t.add_argument("--no-rescale", action="store_true")
    t.add_argument("--workers", type=int, default=1)
    t.add_argument("--out", choices=["text", "json"], default="text")

    s = sub.add_parser("simulate", help="run level/power experiments from a config file")
    s.add_argument("config", help="config path or bundled name (" + ", ".join(
        ["table1-desk", "table2-desk", "table3-desk", "paper-scale"]) + ")")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out-dir", default=".")
    s.add_argument("--reps", type=int, default=None, help="override replications per cell")
    s.add_argument("--paper-scale", action="store_true",
                   help="1000 replications, N=1000 and full grids")
    s.add_argument("--quiet", action="store_true")

    g = sub.add_parser("sample", help="write a copula sample to CSV")
    g.add_argument("family")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int, default=2)
    g.add_argument("--tau", type=float)
    g.add_argument("--theta", type=float)
    g.add_argument("--lambda", dest="lam", type=_floats)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", default="-")
    return p


def _run(args) -> int:
    if args.command == "test":
        try:
            x = read_csv(args.csv, args.delimiter)
            if args.cols:
                x = x.select([c.strip() for c in args.cols.split(",")])
        except OSError as exc:
            raise InputError(f"cannot read {args.csv}: {exc.strerror}") from None
        except EvtestError as exc:
            raise InputError(str(exc)) from None
        ties = TieKind(args.ties)
        n_mult = args.N if args.N is not None else (10000 if ties is TieKind.MIDRANK else 1000)
        try:
            cfg = TestConfig(r_set=args.r, n_multipliers=n_mult, grid_per_axis=args.grid,
                             rescale=not args.no_rescale, statistic=args.stat.upper(),
                             multiplier_law=args.multipliers, seed=args.seed)
        except EvtestError as exc:
            raise ConfigError(str(exc)) from None
        if args.repeats < 1:
            raise ConfigError("--repeats must be >= 1")
        try:
            report = cmd_test(x, cfg, ties, args.repeats, args.seed, args.workers)
        except ConfigError:
            raise
        except EvtestError as exc:
            raise InputError(str(exc)) from None
        sys.stdout.write(report.to_json() + "\n" if args.out == "json" else report.to_text())
        return EXIT_OK
    if args.command == "simulate":
        try:
            table = cmd_simulate(args.config, args.workers, args.out_dir, args.reps, args.paper_scale)
        except ConfigError:
            raise
        except EvtestError as exc:
            raise ConfigError(str(exc)) from None
        if not args.quiet:
            sys.stdout.write(table.to_text())
        return EXIT_OK
    if args.command == "sample":
        try:
            fam = Family.parse(args.family)
            if fam is Family.KHOUDRAJI_GH:
                model = CopulaModel(fam, len(args.lam or ()), args.theta or 4.0, args.lam)
            elif args.tau is not None:
                model = CopulaModel.from_tau(fam, args.tau, args.d)
            else:
                model = CopulaModel(fam, args.d, args.theta if args.theta is not None else float("nan"))
        except EvtestError as exc:
            raise ConfigError(str(exc)) from None
        u = sample(model, args.n, args.seed)
        header = ",".join(f"V{j + 1}" for j in range(model.d))
        lines = [header] + [",".join(repr(float(v)) for v in row) for row in u]
        text = "\n".join(lines) + "\n"
        if args.output == "-":
            sys.stdout.write(text)
        else:
            Path(args.output).write_text(text)
        return EXIT_OK
    raise AssertionError(args.command)  # pragma: no cover


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"evtest: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EvtestError as exc:
        print(f"evtest: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
