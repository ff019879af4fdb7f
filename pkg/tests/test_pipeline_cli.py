import json

import numpy as np
import pytest

from sarcontext.cli import (
    EXIT_OK,
    EXIT_RUNTIME,
    EXIT_USAGE,
    PipelineConfig,
    config_hash,
    main,
    read_config_file,
    resolve_config,
)
from sarcontext.corpus import (
    Label,
    LabeledDataset,
    Tweet,
    UserHistory,
    load_dataset,
)
from sarcontext.embed import Method, load_embedding_store
from sarcontext.errors import ConfigError
from sarcontext.models import ExperimentConfig, ModelKind
from sarcontext.pipeline import (
    EmbedSettings,
    build_embeddings,
    examples_for,
    prepare_corpus,
    run_model,
    tokenize_history,
    tweet_tokens,
)

S, N = Label.SARCASTIC, Label.NON_SARCASTIC
TAGS = frozenset({"sarcasm", "sarcastic", "satire", "irony"})

TINY_EMBED = EmbedSettings(
    d_e=6, personality_dim=5, pv_epochs=2, personality_epochs=5,
    personality_emb=6, encoder_hidden=6, encoder_emb=6, encoder_epochs=2,
)


def _mini_corpus():
    """12 users x 4 tweets, 2 sarcastic + 2 not each. Histories for 10 users.

    Identical per-user label mixes make the stratifier prefer empty buckets
    (same ratio, smaller size), so every bucket is occupied under any seed
    and no split comes out empty.
    """
    tweets = []
    for u in range(12):
        user = f"u{u:02d}"
        for k in range(4):
            i = 4 * u + k
            sarcastic = k < 2
            if sarcastic:
                text = f"oh yeah right topic{u % 4} great stuff"
                if k == 0:
                    text += " #sarcasm"
            else:
                text = f"plain report about topic{u % 4} today fine"
            tweets.append(
                Tweet(
                    id=f"t{i:03d}", user_id=user, timestamp=1000 + i,
                    text=text, label=S if sarcastic else N,
                )
            )
    dataset = LabeledDataset(name="mini", tweets=tuple(tweets))

    histories = {}
    for u in range(10):
        user = f"u{u:02d}"
        anchor = f"t{4 * u:03d}"
        hist = tuple(
            Tweet(
                id=f"{user}h{j}", user_id=user, timestamp=10 + j,
                text=f"history words about topic{(u + j) % 4} and things"
                + (" plus longer rambling filler" if j % 2 else ""),
            )
            for j in range(3)
        )
        histories[user] = UserHistory(user_id=user, anchor_tweet_id=anchor, tweets=hist)
    return dataset, histories


def _write_corpus(tmp_path):
    dataset, histories = _mini_corpus()
    ds_path = tmp_path / "mini.jsonl"
    with open(ds_path, "w") as fh:
        for t in dataset:
            fh.write(json.dumps({
                "id": t.id, "user_id": t.user_id, "timestamp": t.timestamp,
                "text": t.text, "label": t.label.value,
            }) + "\n")
    hist_path = tmp_path / "hist.jsonl"
    with open(hist_path, "w") as fh:
        for user in sorted(histories):
            h = histories[user]
            for t in h.tweets:
                fh.write(json.dumps({
                    "id": t.id, "user_id": t.user_id, "timestamp": t.timestamp,
                    "text": t.text, "anchor_tweet_id": h.anchor_tweet_id,
                }) + "\n")
    return ds_path, hist_path


class TestPrepareCorpus:
    def test_tokenizing_strips_tags(self):
        tokens = tweet_tokens("oh yeah #sarcasm totally", TAGS)
        assert "#sarcasm" not in tokens
        assert tokens == ["oh", "yeah", "totally"]

    def test_short_tweets_filtered(self):
        dataset, histories = _mini_corpus()
        extra = Tweet(id="short", user_id="u00", timestamp=2000,
                      text="too short #sarcasm", label=S)
        dataset = LabeledDataset(name="mini", tweets=dataset.tweets + (extra,))
        prepared = prepare_corpus(dataset, histories, seed=0)
        assert "short" not in prepared.dataset.ids
        assert "short" not in prepared.tokens_by_id
        assert len(prepared.dataset) == 48

    def test_splits_partition_and_train_vocab(self):
        dataset, histories = _mini_corpus()
        prepared = prepare_corpus(dataset, histories, seed=0)
        sizes = len(prepared.train) + len(prepared.valid) + len(prepared.test)
        assert sizes == len(prepared.dataset)
        assert prepared.train_users == {t.user_id for t in prepared.train}
        train_tokens = {
            tok for t in prepared.train for tok in prepared.tokens_by_id[t.id]
        }
        # vocabulary beyond the two specials comes from the train split only
        assert set(prepared.vocab.tokens()[2:]) <= train_tokens

    def test_tokenize_history_drops_empty_tweets(self):
        hist = UserHistory(
            user_id="u", anchor_tweet_id="a",
            tweets=(
                Tweet(id="h1", user_id="u", timestamp=1, text="#sarcasm"),
                Tweet(id="h2", user_id="u", timestamp=2, text="real words here"),
            ),
        )
        tokenized = tokenize_history(hist, TAGS)
        assert tokenized.tweet_tokens == (("real", "words", "here"),)


class TestBuildEmbeddings:
    @pytest.mark.parametrize("method", [Method.W_CASCADE, Method.ED])
    def test_every_user_gets_an_embedding(self, method):
        dataset, histories = _mini_corpus()
        prepared = prepare_corpus(dataset, histories, seed=0)
        embeddings = build_embeddings(prepared, method, TINY_EMBED, seed=0)
        assert set(embeddings) == dataset.users()
        for user, emb in embeddings.items():
            assert emb.dim == TINY_EMBED.d_e
            assert emb.method is method
        # users without history files get flagged zero vectors
        for user in ("u10", "u11"):
            assert embeddings[user].is_flagged("empty_history")
            assert not embeddings[user].vector.any()

    def test_embeddings_are_deterministic(self):
        dataset, histories = _mini_corpus()
        prepared = prepare_corpus(dataset, histories, seed=0)
        a = build_embeddings(prepared, Method.ED, TINY_EMBED, seed=1)
        b = build_embeddings(prepared, Method.ED, TINY_EMBED, seed=1)
        for user in a:
            np.testing.assert_array_equal(a[user].vector, b[user].vector)


class TestRunModel:
    def test_exclusive_model_requires_embeddings(self):
        dataset, histories = _mini_corpus()
        prepared = prepare_corpus(dataset, histories, seed=0)
        config = ExperimentConfig(
            word_dim=6, composition_dim=6, embedding_dim=6, epochs=1,
            learning_rate=0.01, batch_size=8,
        )
        with pytest.raises(ValueError, match="needs user embeddings"):
            run_model(prepared, ModelKind.parse("ex-ed"), config)

    def test_run_model_end_to_end(self):
        dataset, histories = _mini_corpus()
        prepared = prepare_corpus(dataset, histories, seed=0)
        config = ExperimentConfig(
            word_dim=6, composition_dim=6, embedding_dim=6, epochs=2,
            learning_rate=0.01, batch_size=8,
        )
        embeddings = build_embeddings(prepared, Method.ED, TINY_EMBED, seed=0)
        run = run_model(prepared, ModelKind.parse("ex-ed"), config, embeddings)
        assert run.result.model == "EX-ED"
        assert run.result.dataset == "mini"
        assert 0.0 <= run.result.f1 <= 1.0
        assert len(run.predictions) == len(prepared.test)
        assert run.n_failures == 0

    def test_examples_carry_embeddings_and_indices(self):
        dataset, histories = _mini_corpus()
        prepared = prepare_corpus(dataset, histories, seed=0)
        embeddings = build_embeddings(prepared, Method.ED, TINY_EMBED, seed=0)
        examples = examples_for(prepared, prepared.train, embeddings)
        assert len(examples) == len(prepared.train)
        for ex in examples:
            assert ex.indices == tuple(
                prepared.vocab.encode(prepared.tokens_by_id[ex.tweet_id])
            )
            np.testing.assert_array_equal(
                ex.embedding, embeddings[ex.user_id].vector
            )
        bare = examples_for(prepared, prepared.train)
        assert all(ex.embedding is None for ex in bare)


class TestConfigHandling:
    def test_read_config_file_with_coercion(self, tmp_path):
        cfg = tmp_path / "run.ini"
        cfg.write_text(
            "[paths]\ndataset = data.jsonl\n"
            "[experiment]\nseed = 5\nlearning_rate = 0.01\n"
            "[split]\nmin_words = 2\n"
        )
        values = read_config_file(cfg)
        assert values == {
            "dataset": "data.jsonl", "seed": 5,
            "learning_rate": 0.01, "min_words": 2,
        }

    def test_config_file_rejects_unknowns(self, tmp_path):
        bad_section = tmp_path / "a.ini"
        bad_section.write_text("[mystery]\nx = 1\n")
        with pytest.raises(ConfigError, match="unknown config section"):
            read_config_file(bad_section)
        wrong_home = tmp_path / "b.ini"
        wrong_home.write_text("[paths]\nseed = 1\n")
        with pytest.raises(ConfigError, match="unknown key"):
            read_config_file(wrong_home)
        bad_type = tmp_path / "c.ini"
        bad_type.write_text("[experiment]\nseed = soon\n")
        with pytest.raises(ConfigError, match="expects int"):
            read_config_file(bad_type)
        with pytest.raises(ConfigError, match="not found"):
            read_config_file(tmp_path / "missing.ini")

    def test_flags_override_file_values(self, tmp_path):
        cfg = tmp_path / "run.ini"
        cfg.write_text("[experiment]\nseed = 5\nepochs = 9\n")
        import argparse

        ns = argparse.Namespace(config=str(cfg), seed=7)
        resolved = resolve_config(ns)
        assert resolved.seed == 7  # flag wins
        assert resolved.epochs == 9  # file fills the gap
        assert resolved.batch_size == 16  # default fills the rest

    def test_tag_set_parsing(self):
        assert PipelineConfig(tags="a, b c").tag_set() == {"a", "b", "c"}
        with pytest.raises(ConfigError, match="at least one"):
            PipelineConfig(tags=" ,").tag_set()

    def test_config_hash_tracks_content(self):
        a = PipelineConfig(seed=1)
        b = PipelineConfig(seed=1)
        c = PipelineConfig(seed=2)
        assert config_hash(a) == config_hash(b)
        assert config_hash(a) != config_hash(c)


class TestCliCommands:
    def test_usage_errors_exit_2(self, tmp_path):
        assert main([]) == EXIT_USAGE
        assert main(["ingest", "--dataset", str(tmp_path / "nope.jsonl"),
                     "--out", str(tmp_path / "o")]) == EXIT_USAGE
        assert main(["embed", "--method", "glove"]) == EXIT_USAGE
        assert main(["train-eval", "--model", "bert"]) == EXIT_USAGE
        bad_cfg = tmp_path / "bad.ini"
        bad_cfg.write_text("[paths]\nbogus = 1\n")
        assert main(["ingest", "--config", str(bad_cfg)]) == EXIT_USAGE

    def test_ingest_writes_report_and_sidecar(self, tmp_path, capsys):
        ds_path, hist_path = _write_corpus(tmp_path)
        out = tmp_path / "runs"
        code = main([
            "ingest", "--dataset", str(ds_path), "--histories", str(hist_path),
            "--out", str(out), "--seed", "3",
        ])
        assert code == EXIT_OK
        report = json.loads((out / "report.json").read_text())
        assert report["dataset"] == {
            "name": "mini", "total": 48, "sarcastic": 24,
            "non_sarcastic": 24, "users": 12,
        }
        assert report["histories"] == {"users": 10, "tweets": 30}
        sidecar = json.loads((out / "ingest.sidecar.json").read_text())
        assert sidecar["command"] == "ingest"
        assert sidecar["seed"] == 3
        assert sidecar["config"]["dataset"] == str(ds_path)
        assert set(sidecar["inputs"]) == {"dataset", "histories"}
        for entry in sidecar["inputs"].values():
            assert len(entry["sha256"]) == 64
        shown = capsys.readouterr().out
        assert "48 tweets" in shown

    def test_split_is_reproducible(self, tmp_path):
        ds_path, _ = _write_corpus(tmp_path)
        out = tmp_path / "runs"
        args = ["split", "--dataset", str(ds_path), "--out", str(out), "--seed", "4"]
        assert main(args) == EXIT_OK
        first = (out / "split.jsonl").read_bytes()
        report = json.loads((out / "split-report.json").read_text())
        assert report["train"] + report["valid"] + report["test"] == 48
        assert report["filtered_out"] == 0
        assert report["valid"] > 0 and report["test"] > 0
        assert main(args) == EXIT_OK
        assert (out / "split.jsonl").read_bytes() == first

    def test_embed_then_train_eval(self, tmp_path):
        ds_path, hist_path = _write_corpus(tmp_path)
        out = tmp_path / "runs"
        base = [
            "--dataset", str(ds_path), "--histories", str(hist_path),
            "--out", str(out), "--embedding_dim", "6", "--seed", "0",
        ]
        missing = main(["train-eval", *base, "--model", "ex-ed", "--epochs", "2"])
        assert missing == EXIT_USAGE  # no embedding store yet

        assert main(["embed", *base, "--method", "ed"]) == EXIT_OK
        store = load_embedding_store(out / "embeddings-ed.txt")
        assert set(store) == {f"u{i:02d}" for i in range(12)}
        assert (out / "embed-ed.sidecar.json").exists()

        code = main([
            "train-eval", *base, "--model", "ex-ed",
            "--epochs", "2", "--batch_size", "8",
        ])
        assert code == EXIT_OK
        assert (out / "model-ex-ed.pt").exists()
        assert (out / "model-ex-ed.pt.json").exists()
        preds = [
            json.loads(line)
            for line in (out / "predictions-ex-ed.jsonl").read_text().splitlines()
        ]
        assert preds and all("tweet_id" in p for p in preds)
        sidecar = json.loads((out / "train-eval-ex-ed.sidecar.json").read_text())
        assert set(sidecar["inputs"]) == {"dataset", "embeddings"}

        # rerunning the same (dataset, model) key replaces the row
        lines = (out / "results.csv").read_text().splitlines()
        assert lines[0] == "dataset,model,f1,tp,fp,fn,tn"
        assert len(lines) == 2
        assert main([
            "train-eval", *base, "--model", "ex-ed",
            "--epochs", "3", "--batch_size", "8",
        ]) == EXIT_OK
        lines = (out / "results.csv").read_text().splitlines()
        assert len(lines) == 2
        assert lines[1].startswith("mini,EX-ED,")

    def test_analyze_reports_tag_agreement(self, tmp_path):
        ds_path, _ = _write_corpus(tmp_path)
        out = tmp_path / "runs"
        code = main(["analyze", "--dataset", str(ds_path), "--out", str(out)])
        assert code == EXIT_OK
        report = json.loads((out / "analysis.json").read_text())
        # each user tags 1 of its 2 sarcastic tweets
        assert report["disagreement"] == {
            "sarcastic_with_tag": 12, "sarcastic_without_tag": 12,
            "nonsarcastic_with_tag": 0, "nonsarcastic_without_tag": 24,
        }
        assert report["relabeled"] == {
            "name": "mini#", "sarcastic": 12, "non_sarcastic": 36,
        }
        relabeled = load_dataset(out / "relabeled.jsonl")
        assert relabeled.label_counts() == (12, 36)
