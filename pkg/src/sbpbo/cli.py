"""Command-line entry point: ``sbpbo run | suite | report``.

Settings are resolved in increasing precedence: config file, ``SBPBO_*``
environment variables, command-line flags.
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import yaml

from .harness import (
    ExperimentConfig,
    ReportSchemaError,
    format_table,
    report,
    run_experiment,
    write_report,
)

ENV_PREFIX = "SBPBO_"

# flag name -> (config field, parser)
_FIELDS = {
    "problem": ("problem", str),
    "m": ("m", int),
    "d": ("d", int),
    "ratios": ("ratios", lambda s: tuple(int(v) for v in str(s).replace(",", " ").split())),
    "rthres": ("r_thres", int),
    "variant": ("variant", str),
    "fe-max": ("fe_max_expensive", int),
    "runs": ("runs", int),
    "seed": ("seed", int),
    "out": ("out_dir", str),
    "workers": ("workers", int),
}


def env_name(flag):
    return ENV_PREFIX + flag.upper().replace("-", "_")


def load_config_file(path):
    text = Path(path).read_text(encoding="utf-8")
    if str(path).endswith(".json"):
        return json.loads(text)
    return yaml.safe_load(text) or {}


def _normalize(data):
    data = dict(data)
    if "ratios" in data and not isinstance(data["ratios"], (list, tuple)):
        data["ratios"] = _FIELDS["ratios"][1](data["ratios"])
    return data


def overrides(args, environ):
    """Environment values, then flag values, keyed by config field."""
    out = {}
    for flag, (field, parse) in _FIELDS.items():
        value = environ.get(env_name(flag))
        if value not in (None, ""):
            out[field] = parse(value)
    for flag, (field, parse) in _FIELDS.items():
        value = getattr(args, flag.replace("-", "_"), None)
        if value is not None:
            out[field] = parse(value)
    return out


def resolve_config(base, args, environ=None):
    environ = os.environ if environ is None else environ
    data = _normalize(base)
    data.update(overrides(args, environ))
    return ExperimentConfig.from_mapping(data)


def _add_experiment_flags(p):
    p.add_argument("--config", help="YAML or JSON file with ExperimentConfig fields")
    p.add_argument("--problem", help="benchmark family, e.g. DTLZ2 or WFG4")
    p.add_argument("--m", help="number of objectives")
    p.add_argument("--d", help="number of decision variables")
    p.add_argument("--ratios", help="comma-separated evaluation ratios, one per objective")
    p.add_argument("--rthres", help="ratio threshold separating cheap objectives")
    p.add_argument("--variant", help="SBP_BO, BO_AAF, SBP_BO_R, SBP_BO_C or SBP_NoGPc")
    p.add_argument("--fe-max", help="budget of full (expensive) evaluations")
    p.add_argument("--runs", help="number of seeded runs")
    p.add_argument("--seed", help="master seed")
    p.add_argument("--out", help="output directory")
    p.add_argument("--workers", help="parallel runs")


def build_parser():
    parser = argparse.ArgumentParser(prog="sbpbo", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment")
    _add_experiment_flags(p_run)

    p_suite = sub.add_parser("suite", help="run a list of experiments from a config file")
    _add_experiment_flags(p_suite)

    p_rep = sub.add_parser("report", help="aggregate summaries into a comparison table")
    p_rep.add_argument("dirs", nargs="+", help="result directories")
    p_rep.add_argument("--out", default=None, help="output prefix for .csv/.txt (default: print only)")
    return parser


def _suite_configs(args):
    """Suite file: a list of experiments, or ``{defaults: {...}, experiments: [...]}``."""
    if not args.config:
        raise SystemExit("suite needs --config")
    data = load_config_file(args.config)
    if isinstance(data, list):
        defaults, items = {}, data
    else:
        defaults, items = data.get("defaults", {}), data.get("experiments", [])
    configs = []
    for item in items:
        cfg = resolve_config({**defaults, **item}, args)
        if "out_dir" not in item:
            cfg = ExperimentConfig.from_mapping({**cfg.__dict__, "out_dir": str(Path(cfg.out_dir) / cfg.tag)})
        configs.append(cfg)
    return configs


def _print_result(res):
    s = res["summary"]
    print(f"{res['out_dir']}: median IGD+ {s['median']:.4e}, mean {s['mean']:.4e} "
          f"({len(res['runs']) - res['failed']}/{len(res['runs'])} runs ok)")


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "report":
            if args.out:
                text = write_report(args.dirs, args.out)
            else:
                text = format_table(*report(args.dirs))
            sys.stdout.write(text)
            return 0
        if args.command == "run":
            base = load_config_file(args.config) if args.config else {}
            configs = [resolve_config(base, args)]
        else:
            configs = _suite_configs(args)
    except (ValueError, OSError, ReportSchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    failed = 0
    for cfg in configs:
        res = run_experiment(cfg)
        _print_result(res)
        failed += res["failed"]
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
