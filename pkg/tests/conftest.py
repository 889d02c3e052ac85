import json
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


def synthetic_corpus(n_docs, vocab_size=30000, mean_len=40, seed=0, fields=("question", "sentence")):
    """Zipf-distributed word records, split into two text fields."""
    rng = np.random.default_rng(seed)
    words = np.array([f"w{i}x" for i in range(vocab_size)])
    p = 1.0 / np.arange(1, vocab_size + 1) ** 1.05
    p /= p.sum()
    lens = rng.poisson(mean_len - 1, size=n_docs) + 1
    flat = words[rng.choice(vocab_size, size=int(lens.sum()), p=p)]
    out, off = [], 0
    for n in lens:
        ws = flat[off:off + n]
        off += n
        half = n // 2
        out.append({fields[0]: " ".join(ws[:half]) + "?", fields[1]: " ".join(ws[half:]) + ".", "label": "x"})
    return out


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r, ensure_ascii=False) + "\n")
    return path


@pytest.fixture
def tiny_records():
    return [
        {"question": "What does Christ follower mean?", "sentence": "Christ follower.", "label": "yes"},
        {"question": "Who wrote Carmen?", "sentence": "Georges Bizet's Carmen premiered 3 March 1875.", "label": "yes"},
        {"question": "Which vowel remains distinct?", "sentence": "/i/ remains distinct.", "label": "no"},
        {"question": "Where was the University of Paris?", "sentence": "The Left Bank was the site.", "label": "no"},
        {"question": "Donna fixed a sandwich.", "sentence": "She ate the sandwich.", "label": "yes"},
    ]


@pytest.fixture
def tiny_jsonl(tmp_path, tiny_records):
    return write_jsonl(tmp_path / "tiny.jsonl", tiny_records)


_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        _acceptance[report.nodeid] = report.outcome
    elif "test_acceptance.py" in report.nodeid and report.failed:
        _acceptance[report.nodeid] = "failed"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, outcome in _acceptance.items():
        name = nodeid.split("::")[-1]
        label = {"passed": "PASS", "skipped": "XFAIL"}.get(outcome, "FAIL")
        terminalreporter.write_line(f"{label:5} {name}")
