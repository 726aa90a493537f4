import json

import pytest

from retweetguard.analysis import RetweetThread, save_threads
from retweetguard.cli import main
from retweetguard.corpus import load_corpus
from retweetguard.features import load_feature_matrix
from retweetguard.models import load_model

from conftest import ts


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """A small separable corpus plus labels, built through the CLI itself."""
    root = tmp_path_factory.mktemp("cli")
    corpus = root / "corpus.jsonl"
    labels = root / "labels.tsv"
    code = main(["synth", "--out", str(corpus), "--labels-out", str(labels),
                 "--preset", "genuine=20", "--preset", "bot=20",
                 "--span-days", "21", "--seed", "3"])
    assert code == 0
    return root, corpus, labels


@pytest.fixture(scope="module")
def thread_file(tmp_path_factory, workspace):
    _, corpus, _ = workspace
    user_ids = list(load_corpus(corpus).user_ids)
    threads = [
        RetweetThread(tweet_id="t1",
                      events=((user_ids[0], ts(0)), (user_ids[1], ts(60)),
                              (user_ids[2], ts(300))),
                      declared_count=10),
        RetweetThread(tweet_id="t2", events=((user_ids[3], ts(50)),),
                      declared_count=3),
    ]
    path = tmp_path_factory.mktemp("threads") / "threads.jsonl"
    save_threads(threads, path)
    return path


class TestSynthAndIngest:
    def test_synth_output_validates(self, workspace, capsys):
        _, corpus, labels = workspace
        assert main(["ingest", "--corpus", str(corpus),
                     "--labels", str(labels)]) == 0
        out = capsys.readouterr().out
        assert "corpus ok: 40 users" in out
        assert "bot=20" in out and "genuine=20" in out

    def test_synth_is_reproducible(self, tmp_path):
        paths = [tmp_path / "a.jsonl", tmp_path / "b.jsonl", tmp_path / "c.jsonl"]
        for path in paths[:2]:
            main(["synth", "--out", str(path), "--preset", "genuine=5",
                  "--span-days", "14", "--seed", "9"])
        main(["synth", "--out", str(paths[2]), "--preset", "genuine=5",
              "--span-days", "14", "--seed", "10"])
        assert paths[0].read_bytes() == paths[1].read_bytes()
        assert paths[0].read_bytes() != paths[2].read_bytes()

    def test_synth_rejects_unknown_preset(self, tmp_path, capsys):
        code = main(["synth", "--out", str(tmp_path / "x.jsonl"),
                     "--preset", "alien=5"])
        assert code == 1
        assert capsys.readouterr().err.startswith("error:")

    def test_synth_preset_file(self, workspace, tmp_path):
        root, _, _ = workspace
        preset_file = tmp_path / "presets.json"
        preset_file.write_text(json.dumps({
            "span_days": 14,
            "presets": [{"label": "genuine", "count": 4}],
        }))
        out = tmp_path / "corpus.jsonl"
        assert main(["synth", "--out", str(out),
                     "--presets", str(preset_file)]) == 0
        assert len(load_corpus(out)) == 4

    def test_ingest_missing_file_fails_cleanly(self, capsys):
        assert main(["ingest", "--corpus", "/nonexistent.jsonl"]) == 1
        assert capsys.readouterr().err.startswith("error:")


class TestExtract:
    def test_matrix_shape_and_reproducibility(self, workspace, tmp_path):
        _, corpus, _ = workspace
        first = tmp_path / "X1.tsv"
        second = tmp_path / "X2.tsv"
        assert main(["extract", "--corpus", str(corpus),
                     "--out", str(first)]) == 0
        assert main(["extract", "--corpus", str(corpus),
                     "--out", str(second)]) == 0
        ids, X, names = load_feature_matrix(first)
        assert len(ids) == 40
        assert X.shape == (40, 64)
        assert len(names) == 64
        assert first.read_bytes() == second.read_bytes()


class TestTrainScore:
    def test_train_writes_loadable_model(self, workspace, tmp_path):
        _, corpus, labels = workspace
        out = tmp_path / "model.json"
        assert main(["train", "--corpus", str(corpus), "--labels", str(labels),
                     "--kind", "knn", "--out", str(out)]) == 0
        model = load_model(out)
        assert model.spec.kind == "knn"
        assert list(model.classes) == ["customer", "genuine"]

    def test_train_is_reproducible(self, workspace, tmp_path):
        _, corpus, labels = workspace
        first = tmp_path / "m1.json"
        second = tmp_path / "m2.json"
        for out in (first, second):
            main(["train", "--corpus", str(corpus), "--labels", str(labels),
                  "--kind", "random_forest", "--seed", "5", "--out", str(out)])
        assert first.read_bytes() == second.read_bytes()

    def test_train_accepts_hyperparameter_overrides(self, workspace, tmp_path):
        _, corpus, labels = workspace
        out = tmp_path / "m.json"
        assert main(["train", "--corpus", str(corpus), "--labels", str(labels),
                     "--kind", "bagging", "--set", "n_trees=7",
                     "--out", str(out)]) == 0
        assert load_model(out).spec.hyperparameters["n_trees"] == 7

    def test_train_unknown_kind_fails(self, workspace, tmp_path, capsys):
        _, corpus, labels = workspace
        code = main(["train", "--corpus", str(corpus), "--labels", str(labels),
                     "--kind", "perceptron", "--out", str(tmp_path / "m.json")])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_score_users_and_thread(self, workspace, thread_file, tmp_path):
        _, corpus, labels = workspace
        model = tmp_path / "model.json"
        main(["train", "--corpus", str(corpus), "--labels", str(labels),
              "--kind", "knn", "--out", str(model)])
        user_ids = list(load_corpus(corpus).user_ids)

        out = tmp_path / "scores.tsv"
        assert main(["score", "--model", str(model), "--corpus", str(corpus),
                     "--users", f"{user_ids[0]},ghost",
                     "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "user_id\tlabel\tconfidence\terror"
        first = lines[1].split("\t")
        assert first[0] == user_ids[0]
        assert first[1] in ("genuine", "customer")
        assert lines[2].split("\t") == ["ghost", "-", "-", "unknown user"]

        via_thread = tmp_path / "thread_scores.tsv"
        assert main(["score", "--model", str(model), "--corpus", str(corpus),
                     "--tweet", "t1", "--threads", str(thread_file),
                     "--out", str(via_thread)]) == 0
        assert len(via_thread.read_text().splitlines()) == 4  # header + 3

    def test_score_unknown_tweet_fails(self, workspace, thread_file,
                                       tmp_path, capsys):
        _, corpus, labels = workspace
        model = tmp_path / "model.json"
        main(["train", "--corpus", str(corpus), "--labels", str(labels),
              "--kind", "knn", "--out", str(model)])
        code = main(["score", "--model", str(model), "--corpus", str(corpus),
                     "--tweet", "zzz", "--threads", str(thread_file)])
        assert code == 1
        assert "error:" in capsys.readouterr().err


class TestEvaluate:
    def test_report_macro_f1_on_separable_corpus(self, workspace, tmp_path):
        _, corpus, labels = workspace
        report = tmp_path / "report.json"
        table = tmp_path / "table.tsv"
        assert main(["evaluate", "--corpus", str(corpus),
                     "--labels", str(labels), "--kind", "knn",
                     "--folds", "5", "--out", str(report),
                     "--table", str(table)]) == 0
        payload = json.loads(report.read_text())
        assert payload["macro"]["f1"] >= 0.95
        assert payload["fold_count"] == 5
        assert table.read_text().splitlines()[0] == "metric\tmicro\tmacro"

    def test_importance_lists_singles_families_and_all(self, tmp_path):
        corpus = tmp_path / "corpus.jsonl"
        labels = tmp_path / "labels.tsv"
        main(["synth", "--out", str(corpus), "--labels-out", str(labels),
              "--preset", "genuine=8", "--preset", "bot=8",
              "--span-days", "14", "--seed", "2"])
        out = tmp_path / "importance.csv"
        assert main(["importance", "--corpus", str(corpus),
                     "--labels", str(labels), "--folds", "2",
                     "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "name,group,macro_f1"
        assert len(lines) == 1 + 64 + 5 + 1
        groups = {line.split(",")[1] for line in lines[1:]}
        assert groups == {"single", "family", "all"}


class TestThreadsRerank:
    def test_threads_stats_and_heatmap(self, thread_file, tmp_path):
        stats = tmp_path / "stats.csv"
        heat = tmp_path / "heat.csv"
        assert main(["threads", "--threads", str(thread_file),
                     "--out", str(stats), "--heatmap", str(heat)]) == 0
        lines = stats.read_text().splitlines()
        assert lines[0].startswith("tweet_id,events,declared_count")
        assert lines[1].split(",")[3] == "300.0"  # t1 lifespan
        assert lines[2].split(",")[3] == ""  # t2 has one event
        assert heat.exists()

    def test_rerank_with_id_list_and_labels_file(self, thread_file, tmp_path,
                                                 workspace):
        _, corpus, labels = workspace
        user_ids = list(load_corpus(corpus).user_ids)
        id_list = tmp_path / "customers.txt"
        id_list.write_text(f"{user_ids[0]}\n{user_ids[1]}\n")
        out = tmp_path / "flow.csv"
        assert main(["rerank", "--threads", str(thread_file),
                     "--customers", str(id_list), "--out", str(out)]) == 0
        rows = out.read_text().splitlines()
        assert rows[0] == "before_bin,after_bin,tweets"
        assert sum(int(r.split(",")[2]) for r in rows[1:]) == 2

        # a labels TSV keeps every non-genuine user as a customer
        out2 = tmp_path / "flow2.csv"
        assert main(["rerank", "--threads", str(thread_file),
                     "--customers", str(labels), "--out", str(out2)]) == 0
        assert out2.exists()

    def test_rerank_without_customers_is_diagonal(self, thread_file, tmp_path):
        empty = tmp_path / "none.txt"
        empty.write_text("")
        out = tmp_path / "flow.csv"
        assert main(["rerank", "--threads", str(thread_file),
                     "--customers", str(empty), "--out", str(out)]) == 0
        for row in out.read_text().splitlines()[1:]:
            i, j, n = row.split(",")
            if int(n):
                assert i == j


class TestUsage:
    def test_unknown_subcommand_exits_two(self):
        with pytest.raises(SystemExit) as err:
            main(["frobnicate"])
        assert err.value.code == 2

    def test_missing_required_argument_exits_two(self):
        with pytest.raises(SystemExit) as err:
            main(["extract", "--corpus", "x.jsonl"])
        assert err.value.code == 2

    def test_serve_with_missing_config_fails_cleanly(self, capsys):
        assert main(["serve", "--config", "/nonexistent.json"]) == 1
        assert capsys.readouterr().err.startswith("error:")
