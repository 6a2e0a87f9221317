"""Experiment runner, CSV persistence and cross-experiment reports.

Every file written here is CSV (header row, LF line endings, UTF-8) with
optional '#'-prefixed metadata lines at the top. Wall-clock times go to a
separate ``timing.csv`` so that traces and summaries are byte-reproducible.
"""

import csv
import logging
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import ensemble, gp
from .benchmarks import BenchmarkSpec, make_problem, sample_reference_front, write_front_csv
from .evolution import lattice_layout
from .optimizer import OptimizerConfig, canonical_variant, run

log = logging.getLogger(__name__)

SUMMARY_COLUMNS = ("problem", "m", "d", "variant", "runs", "completed", "mean", "std", "median", "min", "max")


class ReportSchemaError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str = "DTLZ2"
    m: int = 3
    d: int = 10
    k: Optional[int] = None
    ratios: tuple = (5, 5, 1)
    r_thres: int = 1
    variant: str = "SBP_BO"
    fe_max_expensive: int = 300
    runs: int = 5
    seed: int = 0
    out_dir: str = "results"
    workers: int = 1
    u: int = 3
    w_max: int = 20
    gp_restarts: int = 5
    front_size: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "problem", self.problem.upper())
        object.__setattr__(self, "ratios", tuple(int(r) for r in self.ratios))
        object.__setattr__(self, "variant", canonical_variant(self.variant))
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if len(self.ratios) != self.m:
            raise ValueError(f"got {len(self.ratios)} ratios for m={self.m}")

    @classmethod
    def from_mapping(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {', '.join(sorted(unknown))}")
        return cls(**data)

    @property
    def benchmark(self):
        return BenchmarkSpec(self.problem, self.m, self.d, self.k)

    @property
    def tag(self):
        return f"{self.problem}_m{self.m}_{self.variant}"

    def run_seeds(self):
        """Per-run seeds derived from the master seed."""
        children = np.random.SeedSequence(self.seed).spawn(self.runs)
        return [int(c.generate_state(1)[0]) for c in children]

    def optimizer_config(self, seed):
        return OptimizerConfig(fe_max_expensive=self.fe_max_expensive, u=self.u, w_max=self.w_max,
                               variant=self.variant, seed=seed, gp_restarts=self.gp_restarts)


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (np.floating,)):
        return repr(float(v))
    return str(v)


def _write_csv(path, header, rows, meta=None):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for key, value in (meta or {}).items():
            fh.write(f"# {key}: {value}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def read_csv(path):
    """``(metadata, header, rows)`` of a CSV written by this module."""
    meta, lines = {}, []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(":")
                meta[key.strip()] = value.strip()
            else:
                lines.append(line)
    table = list(csv.reader(lines))
    if not table:
        return meta, [], []
    return meta, table[0], table[1:]


def write_trace_csv(path, trace, cheap):
    header = ["itrn", "fe_expensive", "igd_plus"] + [f"fe_cheap_{j + 1}" for j in cheap] + ["sbp_mean"]
    rows = [[r.itrn, r.fe_expensive, r.igd_plus] + [r.fe_cheap[j] for j in cheap] + [r.sbp_mean]
            for r in trace]
    _write_csv(path, header, rows)


def write_archive_csv(path, archive):
    d, m = archive.X.shape[1], archive.F.shape[1]
    nd = np.zeros(len(archive), dtype=bool)
    nd[archive.nondominated] = True
    header = [f"x{i + 1}" for i in range(d)] + [f"f{i + 1}" for i in range(m)] + ["nondominated"]
    rows = [list(x) + list(f) + [int(flag)] for x, f, flag in zip(archive.X, archive.F, nd)]
    _write_csv(path, header, rows)


def _design_metadata(config, front_info):
    spec = config.benchmark
    return {
        "problem": config.problem,
        "m": config.m,
        "d": config.d,
        "k": spec.k if spec.k is not None else "",
        "ratios": " ".join(map(str, config.ratios)),
        "r_thres": config.r_thres,
        "variant": config.variant,
        "fe_max_expensive": config.fe_max_expensive,
        "runs": config.runs,
        "master_seed": config.seed,
        "run_seeds": " ".join(map(str, config.run_seeds())),
        "u": config.u,
        "w_max": config.w_max,
        "n_init": 11 * config.d - 1,
        "training_cap": ensemble.training_cap(config.d),
        "reference_lattice": "x".join(map(str, lattice_layout(config.m))),
        "gp_kernel": "anisotropic squared exponential",
        "gp_restarts": config.gp_restarts,
        "gp_log_length_scale_bounds": f"{gp.LOG_LS_BOUNDS[0]:.6g} {gp.LOG_LS_BOUNDS[1]:.6g}",
        "gp_nugget": f"{gp.NUGGET_START:g} to {gp.NUGGET_MAX:g}",
        "loop_guard": "fe_expensive < fe_max (last batch may overshoot by u-1)",
        "igd_plus_form": "max(a - z, 0)",
        "front_method": front_info["method"],
        "front_size": front_info["size"],
        "front_approximate": front_info["approximate"],
    }


def _one_run(config, index, seed, front):
    """Run one seed and write its files; never raises."""
    out = Path(config.out_dir)
    problem = make_problem(config.benchmark, config.ratios, config.r_thres)
    result = {"run": index, "seed": seed, "status": "ok", "igd_plus": math.nan,
              "fe_expensive": 0, "iterations": 0, "wall_time": math.nan}
    try:
        archive, trace = run(problem, config.optimizer_config(seed), reference_front=front)
        cheap = sorted(trace[-1].fe_cheap)
        write_trace_csv(out / f"trace_run{index}.csv", trace, cheap)
        write_archive_csv(out / f"archive_run{index}.csv", archive)
        result.update(igd_plus=trace[-1].igd_plus, fe_expensive=trace[-1].fe_expensive,
                      iterations=trace[-1].itrn, wall_time=trace[-1].wall_time)
    except Exception as exc:  # reported per run, the other runs continue
        log.exception("run %d (seed %d) failed", index, seed)
        result["status"] = f"failed: {type(exc).__name__}: {exc}".replace("\n", " ")
    return result


def summarize(values):
    vals = [v for v in values if not math.isnan(v)]
    if not vals:
        return {"mean": math.nan, "std": math.nan, "median": math.nan, "min": math.nan, "max": math.nan}
    return {
        "mean": statistics.fmean(vals),
        "std": statistics.stdev(vals) if len(vals) > 1 else 0.0,
        "median": statistics.median(vals),
        "min": min(vals),
        "max": max(vals),
    }


def run_experiment(config):
    """Execute ``config.runs`` seeded runs and write all result files.

    Returns a dict with the summary statistics, the per-run results and the
    number of failed runs.
    """
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    front, info = sample_reference_front(config.benchmark, config.front_size)
    write_front_csv(out / "reference_front.csv", front)
    seeds = config.run_seeds()
    jobs = [(config, i, s, front) for i, s in enumerate(seeds)]
    if config.workers > 1 and config.runs > 1:
        with ProcessPoolExecutor(max_workers=min(config.workers, config.runs)) as pool:
            results = list(pool.map(_one_run, *zip(*jobs)))
    else:
        results = [_one_run(*job) for job in jobs]

    ok = [r for r in results if r["status"] == "ok"]
    stats = summarize([r["igd_plus"] for r in ok])
    meta = _design_metadata(config, info)
    row = [config.problem, config.m, config.d, config.variant, config.runs, len(ok)]
    row += [stats[k] for k in ("mean", "std", "median", "min", "max")]
    _write_csv(out / "summary.csv", SUMMARY_COLUMNS, [row], meta)
    _write_csv(out / "runs.csv", ["run", "seed", "status", "igd_plus", "fe_expensive", "iterations"],
               [[r["run"], r["seed"], r["status"], r["igd_plus"], r["fe_expensive"], r["iterations"]]
                for r in results])
    _write_csv(out / "timing.csv", ["run", "seed", "wall_time_s"],
               [[r["run"], r["seed"], r["wall_time"]] for r in results])
    failed = len(results) - len(ok)
    if failed:
        log.error("%d of %d runs failed; see %s", failed, len(results), out / "runs.csv")
    return {"summary": stats, "runs": results, "failed": failed, "out_dir": str(out)}


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------

def load_summary(directory):
    path = Path(directory) / "summary.csv"
    if not path.is_file():
        raise ReportSchemaError(f"{path}: no summary file")
    _, header, rows = read_csv(path)
    missing = [c for c in SUMMARY_COLUMNS if c not in header]
    if missing:
        raise ReportSchemaError(f"{path}: missing columns {', '.join(missing)}")
    out = []
    for row in rows:
        if len(row) != len(header):
            raise ReportSchemaError(f"{path}: row has {len(row)} fields, header has {len(header)}")
        rec = dict(zip(header, row))
        try:
            rec["m"] = int(rec["m"])
            rec["mean"] = float(rec["mean"])
            rec["std"] = float(rec["std"])
        except ValueError as exc:
            raise ReportSchemaError(f"{path}: {exc}") from None
        out.append(rec)
    return out


def report(directories):
    """Problem x variant table of ``mean (std)`` final IGD+.

    Returns ``(header, rows)``; one row per distinct (problem, m) pair.
    """
    if not directories:
        raise ValueError("need at least one result directory")
    cells, variants, keys = {}, [], []
    for directory in directories:
        for rec in load_summary(directory):
            key = (rec["problem"], rec["m"])
            if key not in keys:
                keys.append(key)
            if rec["variant"] not in variants:
                variants.append(rec["variant"])
            cells[key + (rec["variant"],)] = f"{rec['mean']:.4e} ({rec['std']:.2e})"
    header = ["problem", "m"] + variants
    rows = [[p, m] + [cells.get((p, m, v), "") for v in variants] for p, m in keys]
    return header, rows


def format_table(header, rows):
    table = [list(map(str, header))] + [list(map(str, r)) for r in rows]
    widths = [max(len(r[i]) for r in table) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in table]
    return "\n".join(lines) + "\n"


def write_report(directories, out_prefix):
    """Write ``<prefix>.csv`` and ``<prefix>.txt``; returns the text table."""
    header, rows = report(directories)
    prefix = Path(out_prefix)
    if prefix.parent != Path("."):
        os.makedirs(prefix.parent, exist_ok=True)
    _write_csv(prefix.with_suffix(".csv"), header, rows)
    text = format_table(header, rows)
    prefix.with_suffix(".txt").write_text(text, encoding="utf-8")
    return text


def config_dict(config):
    return asdict(config)
