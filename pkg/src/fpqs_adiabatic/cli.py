"""Command-line front end: ``run`` experiment grids, ``fit`` scaling exponents, ``verify`` property suites.

Exit codes: 0 success, 1 runtime failure (or a failed verification), 2 invalid input.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .checks import SUITES, run_suite
from .evolution import EvolutionConfig, choose_parameters, evolve
from .interpolation import make_instance
from .selective import AncillaConfig

log = logging.getLogger("fpqs_adiabatic")

SPEC_VERSION = 1
SEED_STRIDE = 10**6
CSV_COLUMNS = ["family", "N", "gamma", "g", "M", "n", "mode", "trials", "success_rate", "mean_u_apps", "mean_queries"]
FIT_MODELS = ("childs_M", "fpqs_M", "cost_T")


class SpecError(ValueError):
    """The experiment spec is malformed or violates a precondition."""


# -- serialization -------------------------------------------------------

def _round(obj):
    """Floats to 12 significant digits so output is byte-stable across platforms."""
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def dumps(obj) -> str:
    return json.dumps(_round(obj), sort_keys=True, separators=(",", ":"))


# -- experiment spec -----------------------------------------------------

@dataclass(frozen=True)
class Cell:
    index: int
    instance: dict
    problem: object
    config: EvolutionConfig


@dataclass
class ExperimentSpec:
    family: str
    instances: list
    M: list
    n: list
    oracle_mode: list
    l: list
    trials: int
    seed_base: int = 0
    instance_seed: int = 0
    output: str = "results.jsonl"
    boost: tuple | None = None
    measurement_mode: str = "exact_projector"
    strict: bool = True
    target_success: float = 0.5

    @classmethod
    def from_dict(cls, doc: dict, base_dir: Path | None = None) -> "ExperimentSpec":
        if not isinstance(doc, dict):
            raise SpecError("spec must be a JSON object")
        version = doc.get("version", SPEC_VERSION)
        if version != SPEC_VERSION:
            raise SpecError(f"unsupported spec version {version}")
        grid = doc.get("grid", {})
        try:
            spec = cls(
                family=doc["family"],
                instances=list(doc.get("instances") or [doc.get("family_params", {})]),
                M=_as_list(grid.get("M", "auto")),
                n=[int(v) for v in _as_list(grid.get("n", 1))],
                oracle_mode=[str(v) for v in _as_list(grid.get("oracle_mode", "exact"))],
                l=_as_list(grid.get("l", None)),
                trials=int(doc["trials"]),
                seed_base=int(doc.get("seed_base", 0)),
                instance_seed=int(doc.get("instance_seed", 0)),
                output=str(doc.get("output", "results.jsonl")),
                boost=tuple(grid["boost"]) if grid.get("boost") is not None else None,
                measurement_mode=str(grid.get("measurement_mode", "exact_projector")),
                strict=bool(doc.get("strict", True)),
                target_success=float(doc.get("target_success", 0.5)),
            )
        except KeyError as exc:
            raise SpecError(f"missing field {exc.args[0]!r}") from exc
        except (TypeError, ValueError) as exc:
            raise SpecError(str(exc)) from exc
        if base_dir is not None and not Path(spec.output).is_absolute():
            spec.output = str(base_dir / spec.output)
        return spec

    def cells(self) -> list[Cell]:
        """Expand and validate the grid; raises SpecError before any simulation."""
        if self.trials < 1:
            raise SpecError("trials must be at least 1")
        if not (self.instances and self.M and self.n and self.oracle_mode and self.l):
            raise SpecError("every grid axis must be nonempty")
        cells = []
        for params in self.instances:
            try:
                problem = make_instance(self.family, params, seed=self.instance_seed)
            except (KeyError, ValueError, RuntimeError) as exc:
                raise SpecError(f"instance {params}: {exc}") from exc
            info = {"family": self.family, "params": params, "N": problem.dim,
                    "gamma": problem.gamma, "g": problem.min_gap}
            for M, n, mode, l in itertools.product(self.M, self.n, self.oracle_mode, self.l):
                if M == "auto":
                    try:
                        M = choose_parameters(problem, self.target_success).M
                    except ValueError as exc:
                        raise SpecError(f"instance {params}: {exc}") from exc
                try:
                    anc = AncillaConfig.for_problem(problem, int(l)) if l is not None else None
                    cfg = EvolutionConfig(
                        M=int(M), fpqs_level=n, oracle_mode=mode,
                        boost=self.boost if mode == "pea_boosted" else None,
                        measurement_mode=self.measurement_mode, ancilla=anc, strict=self.strict,
                    )
                    cfg.validate(problem)
                except (TypeError, ValueError) as exc:
                    raise SpecError(f"cell {len(cells)} ({params}, M={M}, n={n}, {mode}, l={l}): {exc}") from exc
                cells.append(Cell(len(cells), info, problem, cfg))
        return cells


def _as_list(v) -> list:
    return list(v) if isinstance(v, (list, tuple)) else [v]


def trial_seed(seed_base: int, cell: int, trial: int) -> int:
    return seed_base + cell * SEED_STRIDE + trial


def _run_trial(cell: Cell, trial: int, seed_base: int) -> dict:
    seed = trial_seed(seed_base, cell.index, trial)
    cfg = EvolutionConfig(**{**asdict(cell.config), "ancilla": cell.config.ancilla, "seed": seed})
    res = evolve(cell.problem, cfg, np.random.default_rng(seed))
    return {"cell": cell.index, "trial": trial, "instance": cell.instance, **res.to_record()}


def thread_count() -> int:
    raw = os.environ.get("FPQS_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        log.warning("ignoring non-integer FPQS_THREADS=%r", raw)
        return 1


def execute(spec: ExperimentSpec, threads: int = 1) -> tuple[Path, Path]:
    """Run every cell x trial; results are written in (cell, trial) order."""
    cells = spec.cells()
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    tasks = [(c, t) for c in cells for t in range(spec.trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        records = list(pool.map(lambda ct: _run_trial(ct[0], ct[1], spec.seed_base), tasks))
    with out.open("w") as fh:
        for rec in records:
            fh.write(dumps(rec) + "\n")
    summary = out.with_suffix(".csv")
    summary.write_text(summarize(records))
    return out, summary


def summarize(records: list[dict]) -> str:
    rows: dict[int, list[dict]] = {}
    for rec in records:
        rows.setdefault(rec["cell"], []).append(rec)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for cell in sorted(rows):
        recs = rows[cell]
        inst, cfg = recs[0]["instance"], recs[0]["config"]
        writer.writerow(_round([
            inst["family"], inst["N"], inst["gamma"], inst["g"], cfg["M"], cfg["fpqs_level"],
            cfg["oracle_mode"], len(recs),
            float(np.mean([r["success"] for r in recs])),
            float(np.mean([r["ledger"]["u_applications"] for r in recs])),
            float(np.mean([r["ledger"]["oracle_queries"] for r in recs])),
        ]))
    return buf.getvalue()


# -- fitting -------------------------------------------------------------

@dataclass
class FitReport:
    model: str
    x: list
    y: list
    slope: float
    intercept: float
    r2: float

    def to_dict(self) -> dict:
        return asdict(self)


def fit_power_law(x, y, model: str = "custom") -> FitReport:
    """Least-squares line through (ln x, ln y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y):
        raise ValueError("x and y differ in length")
    if len(np.unique(x)) < 4:
        raise ValueError("a fit needs at least 4 distinct x values")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("power-law fit needs positive data")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    total = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - float(np.sum(resid**2) / total) if total > 0 else 1.0
    return FitReport(model, x.tolist(), y.tolist(), float(slope), float(intercept), min(1.0, max(0.0, r2)))


def fit_results(records: list[dict], model: str, strip_logs: bool = False, threshold: float = 0.9) -> FitReport:
    """Scaling fit against x = Gamma/g.

    childs_M / fpqs_M: per instance, the smallest M whose success rate
    reaches ``threshold`` (baseline records n = 0, search records n >= 1).
    cost_T: mean U applications of the successful runs of the largest-M cell.
    """
    if model not in FIT_MODELS:
        raise ValueError(f"model must be one of {FIT_MODELS}")
    groups: dict[tuple, dict[int, list]] = {}
    for rec in records:
        n = rec["config"]["fpqs_level"]
        if (model == "childs_M") != (n == 0) and model != "cost_T":
            continue
        inst = rec["instance"]
        key = (inst["gamma"] / inst["g"], json.dumps(inst["params"], sort_keys=True))
        groups.setdefault(key, {}).setdefault(rec["config"]["M"], []).append(rec)
    xs, ys = [], []
    for (x, _), by_m in sorted(groups.items()):
        if model == "cost_T":
            recs = by_m[max(by_m)]
            costs = [r["ledger"]["u_applications"] for r in recs]
            y = float(np.mean(costs))
            if strip_logs and x > 1:
                y /= math.log(x) ** 4
        else:
            ok = [M for M, recs in sorted(by_m.items()) if np.mean([r["success"] for r in recs]) >= threshold]
            if not ok:
                continue
            y = float(ok[0])
        xs.append(x)
        ys.append(y)
    return fit_power_law(xs, ys, model)


def read_jsonl(path: Path) -> list[dict]:
    with path.open() as fh:
        return [json.loads(line) for line in fh if line.strip()]


# -- commands ------------------------------------------------------------

def cmd_run(args) -> int:
    path = Path(args.spec)
    try:
        doc = json.loads(path.read_text())
        spec = ExperimentSpec.from_dict(doc, base_dir=path.parent)
        if args.output:
            spec.output = args.output
        spec.cells()  # validate everything before launching
    except (OSError, json.JSONDecodeError, SpecError) as exc:
        print(f"invalid spec: {exc}", file=sys.stderr)
        return 2
    try:
        out, summary = execute(spec, threads=thread_count())
    except Exception as exc:  # noqa: BLE001 - report any simulation failure as exit 1
        log.exception("run failed")
        print(f"run failed: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out} and {summary}")
    return 0


def cmd_fit(args) -> int:
    try:
        records = read_jsonl(Path(args.results))
        report = fit_results(records, args.model, strip_logs=args.strip_logs, threshold=args.threshold)
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"cannot fit: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(_round(report.to_dict())))
    return 0


def cmd_verify(args) -> int:
    if args.suite not in SUITES:
        print(f"unknown suite {args.suite!r}; choose from {sorted(SUITES)}", file=sys.stderr)
        return 2
    results = run_suite(args.suite, seed=args.seed)
    if args.format == "json":
        print(json.dumps([_round(r.to_dict()) for r in results], indent=2))
    else:
        width = max(len(r.name) for r in results)
        for r in results:
            print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.detail}")
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fpqs-bench", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute an experiment spec (JSON)")
    run.add_argument("spec")
    run.add_argument("-o", "--output", help="override the spec's output path")
    run.set_defaults(func=cmd_run)

    fit = sub.add_parser("fit", help="log-log fit of a results file against Gamma/g")
    fit.add_argument("results")
    fit.add_argument("--model", choices=FIT_MODELS, required=True)
    fit.add_argument("--strip-logs", action="store_true", help="divide cost by ln^4(Gamma/g) before fitting")
    fit.add_argument("--threshold", type=float, default=0.9, help="success rate defining M*")
    fit.set_defaults(func=cmd_fit)

    verify = sub.add_parser("verify", help="run a seeded property suite")
    verify.add_argument("suite", help=f"one of {sorted(SUITES)}")
    verify.add_argument("--format", choices=("table", "json"), default="table")
    verify.add_argument("--seed", type=int, default=0)
    verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses 2 for usage errors already
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
