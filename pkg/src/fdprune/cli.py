"""Command-line entry point: ``fdprune {score,prune,stats,project}``.

Exit codes: 0 success, 1 usage/config error, 2 data error,
3 internal error or solver non-convergence (report.json still written).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ._parallel import default_threads
from .errors import ConfigError, FDPruneError
from .geomedian import SolverConfig
from .corpus import load_corpus
from .pipeline import (
    RunConfig,
    RunReport,
    _Timer,
    cmd_project,
    cmd_prune,
    cmd_score,
    cmd_stats,
    read_coreset,
    score_corpus,
)
from .pruner import STRATEGIES, PruneConfig

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("fdprune")

DEFAULTS = {
    "input": None,
    "format": None,
    "fields": "text",
    "label_field": None,
    "min_token_length": 1,
    "normalize": True,
    "rate": None,
    "strategy": "adaptive",
    "strata": 100,
    "threshold": 1500,
    "epsilon": 1e-5,
    "max_iterations": 1000,
    "seed": 0,
    "out_dir": "out",
    "threads": None,
    "emit_scores": True,
    "emit_strata": True,
    "emit_projection": False,
    "dump_embeddings": False,
    "coreset": None,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_pipeline_args(p, with_prune):
    p.add_argument("--config", help="TOML or JSON file with option defaults")
    p.add_argument("--input", help="input corpus (.jsonl or .csv)")
    p.add_argument("--format", choices=["jsonl", "csv"])
    p.add_argument("--fields", help="comma-separated text fields, joined with one space")
    p.add_argument("--label-field", dest="label_field")
    p.add_argument("--min-token-length", dest="min_token_length", type=int)
    p.add_argument("--no-normalize", dest="normalize", action="store_const", const=False,
                   help="skip row L2 normalization of the TF-IDF vectors")
    p.add_argument("--epsilon", type=float, help="geometric median accuracy (default 1e-5)")
    p.add_argument("--max-iterations", dest="max_iterations", type=int)
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--threads", type=int, help="worker threads (default: all cores)")
    p.add_argument("--emit-scores", dest="emit_scores", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--emit-projection", dest="emit_projection", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--dump-embeddings", dest="dump_embeddings", action="store_const", const=True,
                   help="write embeddings.txt (row col value)")
    p.add_argument("-v", "--verbose", action="count", default=0)
    if with_prune:
        p.add_argument("--rate", type=float, help="fraction of samples to remove, 0 < r < 1")
        p.add_argument("--strategy", choices=STRATEGIES)
        p.add_argument("--strata", type=int, help="number of equal-width score strata (default 100)")
        p.add_argument("--threshold", type=int, help="adaptive size threshold (default 1500)")
        p.add_argument("--seed", type=int)
        p.add_argument("--emit-strata", dest="emit_strata", action=argparse.BooleanOptionalAction, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fdprune", description="Model-free dataset pruning by TF-IDF frequency distance.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _add_pipeline_args(sub.add_parser("score", help="compute FD scores"), with_prune=False)
    _add_pipeline_args(sub.add_parser("prune", help="score and select a coreset"), with_prune=True)
    proj = sub.add_parser("project", help="2-D PCA coordinates of the embeddings")
    _add_pipeline_args(proj, with_prune=False)
    proj.add_argument("--coreset", help="coreset.txt marking kept rows (default: <out-dir>/coreset.txt if present)")
    stats = sub.add_parser("stats", help="summary of a scores.csv file")
    stats.add_argument("scores", help="path to scores.csv")
    stats.add_argument("-v", "--verbose", action="count", default=0)
    return parser


def load_config_file(path) -> dict:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    try:
        if path.suffix.lower() == ".json":
            data = json.loads(raw)
        else:
            data = tomllib.loads(raw.decode("utf-8"))
    except (ValueError, tomllib.TOMLDecodeError) as e:
        raise ConfigError(f"cannot parse config {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a table/object")
    out = {}
    for key, value in data.items():
        key = key.replace("-", "_")
        if key == "field_spec":
            key = "fields"
        if key not in DEFAULTS:
            raise ConfigError(f"unknown config key {key!r} in {path}")
        out[key] = ",".join(value) if key == "fields" and isinstance(value, list) else value
    return out


def resolve(args) -> dict:
    """Merge defaults < config file < command-line flags."""
    merged = dict(DEFAULTS)
    if getattr(args, "config", None):
        merged.update(load_config_file(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    if merged["threads"] is None:
        merged["threads"] = default_threads()
    return merged


def make_run_config(opts: dict, command: str) -> RunConfig:
    prune_cfg = None
    if command == "prune":
        if opts["rate"] is None:
            raise ConfigError("--rate is required for prune")
        prune_cfg = PruneConfig(
            rate=float(opts["rate"]),
            strata=int(opts["strata"]),
            size_threshold=int(opts["threshold"]),
            strategy=opts["strategy"],
            seed=int(opts["seed"]),
        )
    return RunConfig(
        input=opts["input"],
        format=opts["format"],
        fields=opts["fields"],
        label_field=opts["label_field"],
        min_token_length=int(opts["min_token_length"]),
        normalize=bool(opts["normalize"]),
        solver=SolverConfig(epsilon=float(opts["epsilon"]), max_iterations=int(opts["max_iterations"])),
        prune=prune_cfg,
        out_dir=opts["out_dir"],
        emit_scores=bool(opts["emit_scores"]),
        emit_strata=bool(opts["emit_strata"]),
        emit_projection=bool(opts["emit_projection"]),
        dump_embeddings=bool(opts["dump_embeddings"]),
        threads=int(opts["threads"]),
    )


def _run_project(cfg: RunConfig, coreset_path):
    timer = _Timer(RunReport())
    if not cfg.input:
        raise ConfigError("no input file given")
    with timer.stage("load"):
        corpus = load_corpus(cfg.input, cfg.format, cfg.fields, cfg.label_field)
    run = score_corpus(corpus, cfg, timer)
    path = Path(coreset_path) if coreset_path else Path(cfg.out_dir) / "coreset.txt"
    if coreset_path and not path.exists():
        raise ConfigError(f"coreset file {path} not found")
    kept = read_coreset(path) if path.exists() else []
    with timer.stage("project"):
        cmd_project(run.embeddings, kept, cfg.out_dir)
    return run


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose > 1 else logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        if args.command == "stats":
            for name, value in cmd_stats(args.scores):
                print(f"{name}\t{value}")
            return 0
        opts = resolve(args)
        cfg = make_run_config(opts, args.command)
        if args.command == "score":
            run = cmd_score(cfg)
        elif args.command == "prune":
            run = cmd_prune(cfg)
        else:
            run = _run_project(cfg, opts["coreset"])
    except FDPruneError as e:
        print(f"fdprune: error: {e}", file=sys.stderr)
        return e.exit_code
    for line in run.report.summary_lines():
        print(line)
    if not run.report.median_converged:
        print("fdprune: error: geometric median did not converge within max_iterations", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
