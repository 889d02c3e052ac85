"""Loading text corpora and splitting them into unigram tokens."""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from ._parallel import parallel_map
from .errors import DataError

# Letters and digits in any script; underscore is excluded from \w on purpose.
_TOKEN_RE = re.compile(r"[^\W_]+")

FORMATS = ("jsonl", "csv")


@dataclass(frozen=True)
class Document:
    id: int
    fields: tuple[tuple[str, str], ...]
    text: str
    label: Optional[str] = None


@dataclass(frozen=True)
class Corpus:
    documents: tuple[Document, ...]

    def __post_init__(self):
        if not self.documents:
            raise DataError("corpus is empty")

    def __len__(self):
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def __getitem__(self, i):
        return self.documents[i]

    @property
    def size(self) -> int:
        return len(self.documents)

    @classmethod
    def from_texts(cls, texts: Sequence[str], labels=None) -> "Corpus":
        """Build a single-field corpus directly from strings."""
        labels = [None] * len(texts) if labels is None else list(labels)
        docs = tuple(
            Document(i, (("text", t),), t, None if lab is None else str(lab))
            for i, (t, lab) in enumerate(zip(texts, labels))
        )
        return cls(docs)


@dataclass(frozen=True)
class TokenStream:
    doc_id: int
    tokens: tuple[str, ...] = field(default_factory=tuple)

    def __len__(self):
        return len(self.tokens)


def make_document(doc_id, record, field_spec, label_field=None) -> Document:
    fields = tuple((name, _as_text(record[name])) for name in field_spec)
    label = None
    if label_field is not None and record.get(label_field) is not None:
        label = _as_text(record[label_field])
    return Document(doc_id, fields, " ".join(v for _, v in fields), label)


def _as_text(value) -> str:
    if value is None:
        return ""
    return value if isinstance(value, str) else str(value)


def load_corpus(path, format=None, field_spec=("text",), label_field=None) -> Corpus:
    """Read a JSONL or CSV file into a :class:`Corpus`.

    ``field_spec`` lists the record fields that make up the scoring text,
    joined by one space in the given order. Document ids are 0-based input
    positions. ``format`` defaults to the file extension.
    """
    path = Path(path)
    field_spec = tuple(field_spec)
    if not field_spec:
        raise DataError("field_spec must name at least one field")
    if format is None:
        format = path.suffix.lstrip(".").lower()
        format = {"json": "jsonl", "ndjson": "jsonl", "tsv": "csv"}.get(format, format)
    if format not in FORMATS:
        raise DataError(f"unsupported format {format!r}; expected one of {FORMATS}")
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as e:
        raise DataError(f"cannot read {path}: {e}") from e
    except UnicodeDecodeError as e:
        raise DataError(f"{path} is not valid UTF-8: {e}") from e
    if not raw.strip():
        raise DataError(f"{path} is empty")

    if format == "jsonl":
        records = _read_jsonl(raw, path)
    else:
        records = _read_csv(raw, path)

    docs = []
    for line_no, record in records:
        for name in field_spec:
            if name not in record:
                raise DataError(f"{path}:{line_no}: missing field {name!r}")
        docs.append(make_document(len(docs), record, field_spec, label_field))
    if not docs:
        raise DataError(f"{path} contains no records")
    return Corpus(tuple(docs))


def _read_jsonl(raw, path):
    out = []
    for line_no, line in enumerate(raw.split("\n"), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            raise DataError(f"{path}:{line_no}: malformed JSON ({e.msg})") from e
        if not isinstance(record, dict):
            raise DataError(f"{path}:{line_no}: expected a JSON object")
        out.append((line_no, record))
    return out


def _read_csv(raw, path):
    reader = csv.reader(io.StringIO(raw, newline=""))
    try:
        header = next(reader)
    except (StopIteration, csv.Error) as e:
        raise DataError(f"{path}: missing CSV header") from e
    out = []
    try:
        for row in reader:
            line_no = reader.line_num
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(
                    f"{path}:{line_no}: malformed record, expected {len(header)} columns, got {len(row)}"
                )
            out.append((line_no, dict(zip(header, row))))
    except csv.Error as e:
        raise DataError(f"{path}:{reader.line_num}: malformed CSV ({e})") from e
    return out


def tokenize_text(text: str, min_length: int = 1) -> list[str]:
    tokens = _TOKEN_RE.findall(text.lower())
    if min_length > 1:
        tokens = [t for t in tokens if len(t) >= min_length]
    return tokens


def tokenize(doc: Document, min_length: int = 1) -> TokenStream:
    """Split a document into lowercase alphanumeric runs.

    Everything that is not a letter or digit acts as a separator.

    >>> tokenize(Document(0, (), "Donna fixed a sandwich.")).tokens
    ('donna', 'fixed', 'a', 'sandwich')
    """
    return TokenStream(doc.id, tuple(tokenize_text(doc.text, min_length)))


def tokenize_corpus(corpus: Corpus, min_length: int = 1, threads: int = 1) -> list[TokenStream]:
    """Tokenize every document; the result is in document-id order."""
    docs = corpus.documents

    def work(chunk):
        return [tokenize(d, min_length) for d in chunk]

    return parallel_map(work, docs, threads=threads)
