"""Coreset selection from Frequency Distance scores.

``adaptive`` keeps the furthest samples when the coreset would hold at most
``size_threshold`` samples and switches to stratified sampling over
equal-width score ranges above it. ``stratified``, ``furthest``,
``closest`` and ``random`` force one branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import ConfigError
from .sampling import StageRNG
from .scoring import ScoreSet

STRATEGIES = ("adaptive", "stratified", "furthest", "closest", "random")


def _exact(rate) -> Fraction:
    # repr gives the shortest decimal that round-trips, so 0.7 -> 7/10 exactly
    return Fraction(repr(float(rate)))


@dataclass(frozen=True)
class PruneConfig:
    rate: float
    strata: int = 100
    size_threshold: int = 1500
    strategy: str = "adaptive"
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < float(self.rate) < 1.0:
            raise ConfigError(f"pruning rate must satisfy 0 < r < 1, got {self.rate}")
        if int(self.strata) < 1:
            raise ConfigError(f"number of strata must be >= 1, got {self.strata}")
        if int(self.size_threshold) < 1:
            raise ConfigError(f"size threshold must be >= 1, got {self.size_threshold}")
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}; choose from {STRATEGIES}")


def coreset_budget(n: int, rate: float) -> int:
    """``floor((1 - rate) * n)`` computed exactly."""
    return math.floor((1 - _exact(rate)) * n)


def adaptive_branch(n: int, rate: float, size_threshold: int = 1500) -> str:
    """Branch the adaptive strategy takes: ``stratified`` iff (1-r)N > threshold."""
    return "stratified" if (1 - _exact(rate)) * n > size_threshold else "furthest"


@dataclass(frozen=True)
class Stratum:
    index: int
    lo: float
    hi: float
    members: tuple[int, ...]

    @property
    def population(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class CoresetSelection:
    kept: np.ndarray
    strategy_used: str
    budget: int
    n_total: int
    strata: Optional[tuple[Stratum, ...]] = None
    per_stratum: Optional[tuple[tuple[int, int, int], ...]] = field(default=None)

    def __len__(self):
        return self.kept.size

    def kept_set(self) -> set[int]:
        return set(int(i) for i in self.kept)

    def coreset_text(self) -> str:
        return "".join(f"{i}\n" for i in self.kept)

    def strata_csv(self) -> str:
        if self.strata is None:
            raise ValueError("selection has no strata")
        selected = {idx: sel for idx, _, sel in self.per_stratum}
        lines = ["stratum,lo,hi,population,selected"]
        for s in self.strata:
            lines.append(f"{s.index},{s.lo!r},{s.hi!r},{s.population},{selected.get(s.index, 0)}")
        return "\n".join(lines) + "\n"


def _selection(kept, strategy, n, **kw) -> CoresetSelection:
    kept = np.sort(np.asarray(kept, dtype=np.int64))
    return CoresetSelection(kept, strategy, int(kept.size), n, **kw)


def _check_budget(scoreset, m):
    if not 1 <= m <= len(scoreset):
        raise ConfigError(f"budget {m} out of range [1, {len(scoreset)}]")


def prune_furthest(scoreset: ScoreSet, m: int) -> CoresetSelection:
    """The ``m`` highest-scoring samples; ties go to the lower doc_id."""
    _check_budget(scoreset, m)
    order = np.lexsort((scoreset.doc_ids, -scoreset.fd))
    return _selection(scoreset.doc_ids[order[:m]], "furthest", len(scoreset))


def prune_closest(scoreset: ScoreSet, m: int) -> CoresetSelection:
    """The ``m`` lowest-scoring samples; ties go to the lower doc_id."""
    _check_budget(scoreset, m)
    order = np.lexsort((scoreset.doc_ids, scoreset.fd))
    return _selection(scoreset.doc_ids[order[:m]], "closest", len(scoreset))


def prune_random(scoreset: ScoreSet, m: int, seed: int = 0) -> CoresetSelection:
    _check_budget(scoreset, m)
    ids = np.sort(scoreset.doc_ids).tolist()
    return _selection(StageRNG(seed, "random").sample(ids, m), "random", len(scoreset))


def make_strata(scoreset: ScoreSet, k: int) -> list[Stratum]:
    """Split ``[min, max]`` into ``k`` equal-width ranges ``[lo, hi)``, the last closed.

    Members are listed in ascending doc_id order.
    """
    lo, hi = scoreset.min, scoreset.max
    width = (hi - lo) / k
    edges = lo + width * np.arange(k + 1)
    edges[-1] = hi
    if hi > lo:
        which = np.searchsorted(edges[1:-1], scoreset.fd, side="right")
    else:
        which = np.zeros(len(scoreset), dtype=np.int64)
    order = np.lexsort((scoreset.doc_ids, which))
    ids, which = scoreset.doc_ids[order], which[order]
    bounds = np.searchsorted(which, np.arange(k + 1), side="left")
    return [
        Stratum(i, float(edges[i]), float(edges[i + 1]), tuple(int(x) for x in ids[bounds[i]:bounds[i + 1]]))
        for i in range(k)
    ]


def prune_stratified(scoreset: ScoreSet, m: int, k: int = 100, seed: int = 0) -> CoresetSelection:
    """Stratified sampling over ``k`` equal-width score ranges.

    Repeatedly takes the least-populated remaining stratum (ties: lower
    index), draws ``min(|B|, m // remaining)`` members from it and removes
    it. Budget lost to flooring is handed out one sample at a time to strata
    with unselected members, largest population first.
    """
    _check_budget(scoreset, m)
    if k < 1:
        raise ConfigError("k must be >= 1")
    strata = make_strata(scoreset, k)
    rng = StageRNG(seed, "stratified")
    chosen: dict[int, list[int]] = {s.index: [] for s in strata}
    pool = [s for s in strata if s.population]
    remaining = m
    while pool:
        smallest = min(pool, key=lambda s: (s.population, s.index))
        quota = min(smallest.population, remaining // len(pool))
        chosen[smallest.index] = rng.sample(smallest.members, quota)
        pool.remove(smallest)
        remaining -= quota

    if remaining:
        by_size = sorted((s for s in strata if s.population), key=lambda s: (-s.population, s.index))
        while remaining:
            progressed = False
            for s in by_size:
                taken = set(chosen[s.index])
                left = [x for x in s.members if x not in taken]
                if not left:
                    continue
                chosen[s.index].append(left[rng.below(len(left))])
                remaining -= 1
                progressed = True
                if not remaining:
                    break
            if not progressed:
                raise ConfigError("budget exceeds the number of samples")

    kept = [x for s in strata for x in chosen[s.index]]
    per_stratum = tuple((s.index, s.population, len(chosen[s.index])) for s in strata if s.population)
    return _selection(kept, "stratified", len(scoreset), strata=tuple(strata), per_stratum=per_stratum)


def prune(scoreset: ScoreSet, cfg: PruneConfig) -> CoresetSelection:
    """Select ``floor((1 - rate) * N)`` samples with the configured strategy."""
    n = len(scoreset)
    m = coreset_budget(n, cfg.rate)
    if m < 1:
        raise ConfigError(f"rate {cfg.rate} leaves an empty coreset for N={n}")
    strategy = cfg.strategy
    if strategy == "adaptive":
        strategy = adaptive_branch(n, cfg.rate, cfg.size_threshold)
    if strategy == "stratified":
        return prune_stratified(scoreset, m, cfg.strata, cfg.seed)
    if strategy == "furthest":
        return prune_furthest(scoreset, m)
    if strategy == "closest":
        return prune_closest(scoreset, m)
    return prune_random(scoreset, m, cfg.seed)
