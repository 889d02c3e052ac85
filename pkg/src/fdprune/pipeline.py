"""End-to-end runs: load -> embed -> median -> score -> prune -> write."""

from __future__ import annotations

import json
import logging
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ._io import atomic_write_text
from .corpus import Corpus, load_corpus, tokenize_corpus
from .errors import ConfigError, FDPruneError, StageError
from .geomedian import PointSet, SolverConfig, geometric_median
from .projection import principal_components, projection_csv
from .pruner import CoresetSelection, PruneConfig, prune
from .scoring import ScoreSet, fd_scores
from .vectorizer import EmbeddingMatrix, build_vocabulary, embed

log = logging.getLogger(__name__)


@dataclass
class RunConfig:
    input: Optional[str] = None
    format: Optional[str] = None
    fields: tuple[str, ...] = ("text",)
    label_field: Optional[str] = None
    min_token_length: int = 1
    normalize: bool = True
    solver: SolverConfig = field(default_factory=SolverConfig)
    prune: Optional[PruneConfig] = None
    out_dir: str = "out"
    emit_scores: bool = True
    emit_strata: bool = True
    emit_projection: bool = False
    dump_embeddings: bool = False
    threads: int = 1

    def __post_init__(self):
        if isinstance(self.fields, str):
            self.fields = tuple(f.strip() for f in self.fields.split(",") if f.strip())
        self.fields = tuple(self.fields)
        if not self.fields:
            raise ConfigError("at least one text field is required")
        if int(self.threads) < 1:
            raise ConfigError("threads must be >= 1")
        if int(self.min_token_length) < 1:
            raise ConfigError("min_token_length must be >= 1")


@dataclass
class RunReport:
    n_docs: int = 0
    vocab_size: int = 0
    median_iterations: int = 0
    median_converged: bool = False
    median_objective: float = float("nan")
    fd_min: float = float("nan")
    fd_mean: float = float("nan")
    fd_max: float = float("nan")
    strategy: Optional[str] = None
    kept: Optional[int] = None
    budget: Optional[int] = None
    threads: int = 1
    timings_ms: dict = field(default_factory=dict)
    total_ms: float = 0.0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def summary_lines(self) -> list[str]:
        out = [
            f"documents\t{self.n_docs}",
            f"vocabulary\t{self.vocab_size}",
            f"median_iterations\t{self.median_iterations}",
            f"median_converged\t{self.median_converged}",
            f"median_objective\t{self.median_objective:.10g}",
            f"fd_min\t{self.fd_min:.6f}",
            f"fd_mean\t{self.fd_mean:.6f}",
            f"fd_max\t{self.fd_max:.6f}",
        ]
        if self.strategy is not None:
            out += [f"strategy\t{self.strategy}", f"kept\t{self.kept}"]
        out += [f"time_{k}_ms\t{v:.1f}" for k, v in self.timings_ms.items()]
        out.append(f"time_total_ms\t{self.total_ms:.1f}")
        return out


@dataclass
class ScoreRun:
    corpus: Corpus
    embeddings: EmbeddingMatrix
    scores: ScoreSet
    report: RunReport
    selection: Optional[CoresetSelection] = None


class _Timer:
    def __init__(self, report: RunReport):
        self.report = report
        self.t0 = time.perf_counter()

    @contextmanager
    def stage(self, name):
        start = time.perf_counter()
        try:
            yield
        except StageError:
            raise
        except FDPruneError as e:
            raise StageError(name, e) from e
        except Exception as e:  # unexpected: still tag the stage
            raise StageError(name, e) from e
        finally:
            self.report.timings_ms[name] = self.report.timings_ms.get(name, 0.0) + (time.perf_counter() - start) * 1e3
            self.report.total_ms = (time.perf_counter() - self.t0) * 1e3


def score_corpus(corpus: Corpus, cfg: RunConfig, timer: Optional[_Timer] = None) -> ScoreRun:
    report = timer.report if timer else RunReport()
    timer = timer or _Timer(report)
    report.threads = cfg.threads
    with timer.stage("tokenize"):
        streams = tokenize_corpus(corpus, cfg.min_token_length, cfg.threads)
    with timer.stage("vocabulary"):
        vocab = build_vocabulary(streams)
    with timer.stage("embed"):
        emb = embed(streams, vocab, normalize=cfg.normalize)
    with timer.stage("median"):
        ps = PointSet(emb)
        med = geometric_median(ps, cfg.solver, threads=cfg.threads)
    with timer.stage("score"):
        scores = fd_scores(ps, med, threads=cfg.threads)
    report.n_docs = len(corpus)
    report.vocab_size = vocab.n
    report.median_iterations = med.iterations
    report.median_converged = med.converged
    report.median_objective = med.objective
    report.fd_min, report.fd_mean, report.fd_max = scores.min, scores.mean, scores.max
    return ScoreRun(corpus, emb, scores, report)


def _load(cfg: RunConfig, timer: _Timer) -> Corpus:
    if not cfg.input:
        raise ConfigError("no input file given")
    with timer.stage("load"):
        return load_corpus(cfg.input, cfg.format, cfg.fields, cfg.label_field)


def _write(run: ScoreRun, cfg: RunConfig, timer: _Timer) -> None:
    out = Path(cfg.out_dir)
    with timer.stage("write"):
        if cfg.emit_scores:
            run.scores.write_csv(out / "scores.csv")
        if cfg.dump_embeddings:
            run.embeddings.write_triplets(out / "embeddings.txt")
        if run.selection is not None:
            atomic_write_text(out / "coreset.txt", run.selection.coreset_text())
            if cfg.emit_strata and run.selection.strata is not None:
                atomic_write_text(out / "strata.csv", run.selection.strata_csv())
    if cfg.emit_projection:
        kept = run.selection.kept if run.selection is not None else ()
        with timer.stage("project"):
            cmd_project(run.embeddings, kept, out)
    run.report.total_ms = (time.perf_counter() - timer.t0) * 1e3
    atomic_write_text(out / "report.json", run.report.to_json())


def cmd_score(cfg: RunConfig) -> ScoreRun:
    """Load, embed, find the median and score; write scores.csv and report.json."""
    timer = _Timer(RunReport())
    corpus = _load(cfg, timer)
    run = score_corpus(corpus, cfg, timer)
    _write(run, cfg, timer)
    return run


def cmd_prune(cfg: RunConfig) -> ScoreRun:
    """:func:`cmd_score` followed by coreset selection (coreset.txt, strata.csv)."""
    if cfg.prune is None:
        raise ConfigError("prune requires a pruning rate")
    timer = _Timer(RunReport())
    corpus = _load(cfg, timer)
    run = score_corpus(corpus, cfg, timer)
    with timer.stage("prune"):
        run.selection = prune(run.scores, cfg.prune)
    run.report.strategy = run.selection.strategy_used
    run.report.kept = len(run.selection)
    run.report.budget = run.selection.budget
    _write(run, cfg, timer)
    return run


def cmd_project(embeddings, kept_ids, out_dir, iterations=50, tol=1e-7):
    """Write projection.csv (doc_id, pc1, pc2, kept) for the embedding rows."""
    proj = principal_components(embeddings, 2, iterations, tol)
    atomic_write_text(Path(out_dir) / "projection.csv", projection_csv(proj, kept_ids))
    return proj


STAT_PERCENTILES = (1, 25, 50, 75, 99)


def cmd_stats(scores: ScoreSet | str | Path) -> list[tuple[str, str]]:
    """Summary rows (name, value) for a score set or a scores.csv path."""
    if not isinstance(scores, ScoreSet):
        scores = ScoreSet.read_csv(scores)
    rows = [
        ("N", str(len(scores))),
        ("min", f"{scores.min:.6f}"),
        ("mean", f"{scores.mean:.6f}"),
        ("max", f"{scores.max:.6f}"),
    ]
    for p, v in zip(STAT_PERCENTILES, np.percentile(scores.fd, STAT_PERCENTILES)):
        rows.append((f"P{p}", f"{v:.6f}"))
    return rows


def read_coreset(path) -> list[int]:
    text = Path(path).read_text(encoding="utf-8")
    return [int(line) for line in text.split() if line.strip()]
