"""Unigram TF-IDF embeddings.

tf[i, j]  = count of term j in doc i / number of tokens in doc i
idf[j]    = ln(N / (1 + df[j]))
t[i]      = tf[i] * idf          (element-wise)

idf may be zero or negative for very common terms; those values are kept.
Rows are optionally scaled to unit L2 norm (the default in the pipeline).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import Corpus, TokenStream, tokenize_corpus
from .errors import DataError


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]
    index: Mapping[str, int]
    df: np.ndarray
    n_docs: int

    @property
    def n(self) -> int:
        return len(self.terms)

    def __len__(self):
        return len(self.terms)

    def __contains__(self, term):
        return term in self.index

    def doc_freq(self, term: str) -> int:
        return int(self.df[self.index[term]])


@dataclass(frozen=True)
class SparseVector:
    """Index/value pairs over a ``dim``-dimensional space."""

    dim: int
    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        val = np.asarray(self.values, dtype=np.float64)
        if idx.shape != val.shape or idx.ndim != 1:
            raise ValueError("indices and values must be 1-D arrays of equal length")
        if idx.size:
            if idx[0] < 0 or idx[-1] >= self.dim or np.any(np.diff(idx) <= 0):
                raise ValueError("indices must be strictly increasing and within [0, dim)")
            if np.any(val == 0) or not np.all(np.isfinite(val)):
                raise ValueError("stored values must be finite and non-zero")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)

    @classmethod
    def from_dense(cls, x) -> "SparseVector":
        x = np.asarray(x, dtype=np.float64)
        nz = np.flatnonzero(x)
        return cls(x.size, nz, x[nz])

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        out[self.indices] = self.values
        return out

    def as_dict(self) -> dict[int, float]:
        return {int(i): float(v) for i, v in zip(self.indices, self.values)}

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def norm(self) -> float:
        return float(np.sqrt(np.dot(self.values, self.values)))


@dataclass(frozen=True)
class EmbeddingMatrix:
    """One TF-IDF row per document, in document-id order (CSR storage)."""

    matrix: sp.csr_matrix
    normalized: bool = False

    def __post_init__(self):
        m = self.matrix
        if not sp.issparse(m):
            m = sp.csr_matrix(np.asarray(m, dtype=np.float64))
        m = sp.csr_matrix(m, dtype=np.float64)
        m.sort_indices()
        object.__setattr__(self, "matrix", m)

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def shape(self):
        return self.matrix.shape

    def __len__(self):
        return self.n_rows

    def row(self, i: int) -> SparseVector:
        m = self.matrix
        lo, hi = m.indptr[i], m.indptr[i + 1]
        return SparseVector(self.dim, m.indices[lo:hi], m.data[lo:hi])

    @property
    def rows(self) -> list[SparseVector]:
        return [self.row(i) for i in range(self.n_rows)]

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def row_norms(self) -> np.ndarray:
        return _row_norms(self.matrix)

    def write_triplets(self, path) -> None:
        """Dump non-zeros as ``row col value`` lines (debug / oracle comparison)."""
        from ._io import atomic_write_text

        coo = self.matrix.tocoo()
        lines = [f"{r} {c} {float(v)!r}" for r, c, v in zip(coo.row, coo.col, coo.data)]
        atomic_write_text(path, "\n".join(lines))


def _streams(docs) -> list[TokenStream]:
    if isinstance(docs, Corpus):
        return tokenize_corpus(docs)
    out = []
    for i, d in enumerate(docs):
        out.append(d if isinstance(d, TokenStream) else TokenStream(i, tuple(d)))
    return out


def build_vocabulary(docs: Iterable[TokenStream] | Corpus) -> Vocabulary:
    """Sorted vocabulary with per-term document frequencies.

    ``docs`` may be a Corpus, TokenStreams or plain token lists.
    """
    streams = _streams(docs)
    if not streams:
        raise DataError("cannot build a vocabulary from an empty corpus")
    df = Counter()
    for s in streams:
        df.update(set(s.tokens))
    if not df:
        raise DataError("corpus contains no tokens; vocabulary would be empty")
    terms = tuple(sorted(df))
    index = {t: j for j, t in enumerate(terms)}
    df_arr = np.array([df[t] for t in terms], dtype=np.int64)
    return Vocabulary(terms, index, df_arr, len(streams))


def _term_ids(tokens, vocab: Vocabulary) -> list[int]:
    try:
        return [vocab.index[t] for t in tokens]
    except KeyError as e:
        raise DataError(f"token {e.args[0]!r} is not in the vocabulary (vocabulary/corpus mismatch)") from None


def term_frequency(tokens: TokenStream | Sequence[str], vocab: Vocabulary) -> SparseVector:
    toks = tokens.tokens if isinstance(tokens, TokenStream) else tuple(tokens)
    if not toks:
        return SparseVector(vocab.n, np.empty(0, np.int64), np.empty(0))
    ids, counts = np.unique(np.asarray(_term_ids(toks, vocab), dtype=np.int64), return_counts=True)
    return SparseVector(vocab.n, ids, counts / float(len(toks)))


def inverse_document_frequency(vocab: Vocabulary, n_docs: int | None = None) -> np.ndarray:
    """Dense idf vector ``ln(N / (1 + df))`` over the vocabulary."""
    N = vocab.n_docs if n_docs is None else n_docs
    if N < 1:
        raise DataError("corpus size must be positive")
    return np.log(N / (1.0 + vocab.df.astype(np.float64)))


def count_matrix(streams: Sequence[TokenStream], vocab: Vocabulary) -> sp.csr_matrix:
    """Raw term counts, one CSR row per stream."""
    lengths = np.fromiter((len(s.tokens) for s in streams), dtype=np.int64, count=len(streams))
    flat = [t for s in streams for t in s.tokens]
    ids = np.asarray(_term_ids(flat, vocab), dtype=np.int64)
    rows = np.repeat(np.arange(len(streams), dtype=np.int64), lengths)
    keys, counts = np.unique(rows * vocab.n + ids, return_counts=True)
    r, c = np.divmod(keys, vocab.n)
    indptr = np.zeros(len(streams) + 1, dtype=np.int64)
    np.cumsum(np.bincount(r, minlength=len(streams)), out=indptr[1:])
    return sp.csr_matrix((counts.astype(np.float64), c, indptr), shape=(len(streams), vocab.n))


def _row_norms(m: sp.csr_matrix) -> np.ndarray:
    out = np.zeros(m.shape[0])
    nz = np.flatnonzero(np.diff(m.indptr))
    if nz.size:
        out[nz] = np.add.reduceat(m.data * m.data, m.indptr[nz])
    return np.sqrt(out)


def embed(docs, vocab: Vocabulary, normalize: bool = True) -> EmbeddingMatrix:
    """TF-IDF matrix for ``docs`` (Corpus, TokenStreams or token lists)."""
    streams = _streams(docs)
    counts = count_matrix(streams, vocab)
    idf = inverse_document_frequency(vocab, len(streams))
    lengths = np.diff(counts.indptr)
    row_of = np.repeat(np.arange(counts.shape[0]), lengths)
    totals = np.asarray(counts.sum(axis=1)).ravel()
    tf = counts.data / totals[row_of]
    data = tf * idf[counts.indices]
    m = sp.csr_matrix((data, counts.indices.copy(), counts.indptr.copy()), shape=counts.shape)
    m.eliminate_zeros()
    if normalize:
        norms = _row_norms(m)
        lengths = np.diff(m.indptr)
        scale = np.repeat(np.where(norms > 0, norms, 1.0), lengths)
        m.data = m.data / scale
    return EmbeddingMatrix(m, normalized=normalize)
