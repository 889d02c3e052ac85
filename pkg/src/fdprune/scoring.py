"""Frequency Distance: L2 distance of each embedding to the geometric median."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._io import atomic_write_text
from .errors import DataError
from .geomedian import MedianResult, PointSet


@dataclass(frozen=True)
class ScoreSet:
    doc_ids: np.ndarray
    fd: np.ndarray
    median: Optional[MedianResult] = None

    def __post_init__(self):
        ids = np.asarray(self.doc_ids, dtype=np.int64)
        fd = np.asarray(self.fd, dtype=np.float64)
        if ids.shape != fd.shape or ids.ndim != 1:
            raise DataError("doc_ids and fd must be 1-D and the same length")
        if ids.size == 0:
            raise DataError("score set is empty")
        if not np.all(np.isfinite(fd)) or np.any(fd < 0):
            raise DataError("scores must be finite and non-negative")
        if np.unique(ids).size != ids.size:
            raise DataError("duplicate doc_id in score set")
        object.__setattr__(self, "doc_ids", ids)
        object.__setattr__(self, "fd", fd)

    def __len__(self):
        return self.fd.size

    @property
    def min(self) -> float:
        return float(self.fd.min())

    @property
    def max(self) -> float:
        return float(self.fd.max())

    @property
    def mean(self) -> float:
        # clipped: the float mean of equal values can land one ulp outside [min, max]
        return float(np.clip(self.fd.mean(), self.fd.min(), self.fd.max()))

    @property
    def scores(self) -> list[tuple[int, float]]:
        return [(int(i), float(v)) for i, v in zip(self.doc_ids, self.fd)]

    def score_of(self, doc_id: int) -> float:
        return float(self.fd[self._position(doc_id)])

    def _position(self, doc_id):
        pos = np.flatnonzero(self.doc_ids == doc_id)
        if pos.size == 0:
            raise KeyError(f"unknown doc_id {doc_id}")
        return int(pos[0])

    def smaller_counts(self) -> np.ndarray:
        """For each sample, how many samples have a strictly smaller score."""
        return np.searchsorted(np.sort(self.fd), self.fd, side="left")

    def percentile_ranks(self) -> np.ndarray:
        return self.smaller_counts() * 100.0 / len(self)

    def percentile_rank(self, doc_id: int) -> float:
        return percentile_rank(self, doc_id)

    def to_csv(self) -> str:
        order = np.argsort(self.doc_ids, kind="stable")
        smaller = self.smaller_counts()
        lines = ["doc_id,fd,percentile"]
        for i in order:
            lines.append(f"{self.doc_ids[i]},{float(self.fd[i])!r},{format_percentile(smaller[i], len(self))}")
        return "\n".join(lines) + "\n"

    def write_csv(self, path):
        return atomic_write_text(path, self.to_csv())

    @classmethod
    def read_csv(cls, path) -> "ScoreSet":
        try:
            text = open(path, encoding="utf-8").read()
        except OSError as e:
            raise DataError(f"cannot read {path}: {e}") from e
        return cls.from_csv(text, source=str(path))

    @classmethod
    def from_csv(cls, text: str, source="<scores>") -> "ScoreSet":
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header is None:
            raise DataError(f"{source}: empty scores file")
        if header[:2] != ["doc_id", "fd"]:
            raise DataError(f"{source}: expected header starting with doc_id,fd, got {header}")
        ids, fd = [], []
        for row in reader:
            if not row:
                continue
            try:
                ids.append(int(row[0]))
                fd.append(float(row[1]))
            except (ValueError, IndexError) as e:
                raise DataError(f"{source}:{reader.line_num}: malformed row {row}") from e
        if not ids:
            raise DataError(f"{source}: no scores")
        return cls(np.array(ids), np.array(fd))


def format_percentile(smaller: int, n: int) -> str:
    """Percentile ``100 * smaller / n`` truncated (not rounded) to 2 decimals."""
    hundredths = (int(smaller) * 10000) // int(n)
    return f"{hundredths // 100}.{hundredths % 100:02d}"


def fd_scores(points, median: MedianResult, threads=1) -> ScoreSet:
    """Distance from every row of ``points`` to ``median.point``."""
    ps = points if isinstance(points, PointSet) else PointSet(points)
    fd = ps.distances(median.point, threads)
    return ScoreSet(np.arange(ps.n), fd, median)


def percentile_rank(scoreset: ScoreSet, doc_id: int) -> float:
    """Share of samples (in %) with a strictly smaller score; ties share the lower rank."""
    fd = scoreset.fd[scoreset._position(doc_id)]
    return float(np.count_nonzero(scoreset.fd < fd) * 100.0 / len(scoreset))
