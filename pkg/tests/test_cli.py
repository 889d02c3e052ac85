import json

import numpy as np
import pytest

from fdprune.cli import main
from fdprune.errors import DataError, StageError
from fdprune.pipeline import RunConfig, cmd_prune, cmd_score, cmd_stats
from fdprune.pruner import PruneConfig, adaptive_branch
from fdprune.scoring import ScoreSet
from conftest import synthetic_corpus, write_jsonl
from oracles import dense_tfidf, median_oracle


def run(args):
    return main([str(a) for a in args])


class TestScore:
    def test_tiny_end_to_end(self, tiny_jsonl, tiny_records, tmp_path):
        out = tmp_path / "out"
        assert run(["score", "--input", tiny_jsonl, "--fields", "question,sentence", "--out-dir", out, "--threads", 1]) == 0
        s = ScoreSet.read_csv(out / "scores.csv")
        assert s.doc_ids.tolist() == list(range(5))
        # independent recomputation: dense tf-idf, unit rows, generic minimizer
        import re
        docs = [re.findall(r"[^\W_]+", (r["question"] + " " + r["sentence"]).lower()) for r in tiny_records]
        _, _, _, t = dense_tfidf(docs)
        t = t / np.linalg.norm(t, axis=1, keepdims=True)
        report = json.loads((out / "report.json").read_text())
        assert report["median_objective"] <= median_oracle(t) * (1 + 1e-5)
        assert s.fd.sum() == pytest.approx(report["median_objective"], rel=1e-6)
        assert report["n_docs"] == 5

    def test_empty_input_names_stage(self, tmp_path, capsys):
        p = tmp_path / "empty.jsonl"
        p.write_text("")
        assert run(["score", "--input", p, "--out-dir", tmp_path / "o"]) == 2
        assert "[load]" in capsys.readouterr().err

    def test_library_error_tagged(self, tmp_path):
        p = tmp_path / "empty.jsonl"
        p.write_text("")
        with pytest.raises(StageError) as ei:
            cmd_score(RunConfig(input=str(p), out_dir=str(tmp_path)))
        assert ei.value.stage == "load" and isinstance(ei.value.cause, DataError)

    def test_missing_input_is_usage_error(self, tmp_path):
        assert run(["score", "--out-dir", tmp_path]) == 1

    def test_bad_flag(self, capsys):
        with pytest.raises(SystemExit) as ei:
            main(["prune", "--rate"])
        assert ei.value.code == 1

    def test_nonconvergence_exit_code(self, tiny_jsonl, tmp_path):
        out = tmp_path / "o"
        code = run(["score", "--input", tiny_jsonl, "--fields", "question,sentence", "--out-dir", out,
                    "--epsilon", "1e-300", "--max-iterations", "1"])
        assert code == 3
        assert json.loads((out / "report.json").read_text())["median_converged"] is False

    def test_dump_embeddings(self, tiny_jsonl, tmp_path):
        out = tmp_path / "o"
        run(["score", "--input", tiny_jsonl, "--fields", "question", "--out-dir", out, "--dump-embeddings"])
        assert (out / "embeddings.txt").read_text().endswith("\n")


class TestPrune:
    def test_rate_zero_rejected(self, tiny_jsonl, tmp_path):
        assert run(["prune", "--input", tiny_jsonl, "--rate", 0.0, "--out-dir", tmp_path]) == 1

    def test_rte_scale_picks_furthest(self, tmp_path):
        p = write_jsonl(tmp_path / "rte.jsonl", synthetic_corpus(2490, vocab_size=3000, seed=1))
        out = tmp_path / "o"
        assert run(["prune", "--input", p, "--fields", "question,sentence", "--rate", 0.7, "--out-dir", out]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["strategy"] == "furthest" and report["kept"] == 747
        assert not (out / "strata.csv").exists()

    def test_adaptive_equals_explicit_branch(self, tmp_path):
        p = write_jsonl(tmp_path / "c.jsonl", synthetic_corpus(2200, vocab_size=2000, seed=2))
        texts = {}
        for strategy in ("adaptive", adaptive_branch(2200, 0.2)):
            out = tmp_path / strategy
            run(["prune", "--input", p, "--fields", "question,sentence", "--rate", 0.2,
                 "--strategy", strategy, "--seed", 5, "--out-dir", out])
            texts[strategy] = (out / "coreset.txt").read_bytes()
        assert adaptive_branch(2200, 0.2) == "stratified"
        assert len(set(texts.values())) == 1

    def test_projection_output(self, tiny_jsonl, tmp_path):
        out = tmp_path / "o"
        run(["prune", "--input", tiny_jsonl, "--fields", "question,sentence", "--rate", 0.4,
             "--out-dir", out, "--emit-projection"])
        lines = (out / "projection.csv").read_text().splitlines()
        assert lines[0] == "doc_id,pc1,pc2,kept"
        kept = set(int(x) for x in (out / "coreset.txt").read_text().split())
        assert {int(l.split(",")[0]) for l in lines[1:] if l.endswith(",1")} == kept

    def test_project_subcommand(self, tiny_jsonl, tmp_path):
        out = tmp_path / "o"
        run(["prune", "--input", tiny_jsonl, "--fields", "question,sentence", "--rate", 0.4, "--out-dir", out])
        (out / "projection.csv").unlink(missing_ok=True)
        assert run(["project", "--input", tiny_jsonl, "--fields", "question,sentence", "--out-dir", out]) == 0
        lines = (out / "projection.csv").read_text().splitlines()
        assert sum(l.endswith(",1") for l in lines[1:]) == 3

    def test_config_file_and_flag_precedence(self, tiny_jsonl, tmp_path):
        cfg = tmp_path / "run.toml"
        cfg.write_text(
            f'input = "{tiny_jsonl}"\nfield_spec = ["question", "sentence"]\nrate = 0.2\nstrategy = "closest"\n'
            f'out_dir = "{tmp_path / "o"}"\n'
        )
        assert run(["prune", "--config", cfg]) == 0
        assert json.loads((tmp_path / "o" / "report.json").read_text())["strategy"] == "closest"
        assert run(["prune", "--config", cfg, "--strategy", "furthest"]) == 0
        assert json.loads((tmp_path / "o" / "report.json").read_text())["strategy"] == "furthest"

    def test_json_config(self, tiny_jsonl, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"input": str(tiny_jsonl), "fields": "question", "rate": 0.5,
                                   "out_dir": str(tmp_path / "j")}))
        assert run(["prune", "--config", cfg]) == 0

    def test_unknown_config_key(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text('{"nope": 1}')
        assert run(["score", "--config", cfg]) == 1

    def test_timings_sum_to_total(self, tmp_path):
        p = write_jsonl(tmp_path / "c.jsonl", synthetic_corpus(4000, vocab_size=3000, seed=3))
        r = cmd_prune(RunConfig(input=str(p), fields=("question", "sentence"), prune=PruneConfig(rate=0.5),
                                out_dir=str(tmp_path / "o")))
        total = sum(r.report.timings_ms.values())
        assert all(v >= 0 for v in r.report.timings_ms.values())
        assert abs(total - r.report.total_ms) <= 0.05 * r.report.total_ms

    def test_artifacts_end_with_newline(self, tmp_path):
        p = write_jsonl(tmp_path / "c.jsonl", synthetic_corpus(3100, vocab_size=3000, seed=4))
        out = tmp_path / "o"
        run(["prune", "--input", p, "--fields", "question,sentence", "--rate", 0.5, "--out-dir", out, "--emit-projection"])
        for name in ("scores.csv", "coreset.txt", "strata.csv", "projection.csv", "report.json"):
            assert (out / name).read_bytes().endswith(b"\n"), name
        assert not list(out.glob(".*"))


class TestStats:
    def test_small(self, tmp_path, capsys):
        p = tmp_path / "s.csv"
        ScoreSet(np.arange(3), [1.0, 2.0, 3.0]).write_csv(p)
        assert run(["stats", p]) == 0
        rows = dict(line.split("\t") for line in capsys.readouterr().out.splitlines())
        assert rows["N"] == "3" and float(rows["mean"]) == 2.0 and float(rows["P50"]) == 2.0

    def test_empty_file(self, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text("")
        assert run(["stats", p]) == 2

    def test_uniform_median(self):
        vals = np.random.default_rng(0).random(1000)
        rows = dict(cmd_stats(ScoreSet(np.arange(1000), vals)))
        assert float(rows["P50"]) == pytest.approx(float(np.quantile(vals, 0.5)), abs=1e-6)
        assert abs(float(rows["P50"]) - 0.5) < 3 * 0.5 / np.sqrt(1000)
