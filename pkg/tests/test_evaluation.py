from types import SimpleNamespace

import numpy as np
import pytest

from sarcontext.corpus import Label, Tweet
from sarcontext.errors import AlignmentError
from sarcontext.evaluation import RunResult, binary_f1, f1_score, results_table

S, N = Label.SARCASTIC, Label.NON_SARCASTIC


def _gold(i, label):
    return Tweet(id=f"t{i}", user_id="u", timestamp=i, text="x y z", label=label)


def _pred(i, label):
    return SimpleNamespace(tweet_id=f"t{i}", label=label)


def _paired(gold_labels, pred_labels):
    golds = [_gold(i, g) for i, g in enumerate(gold_labels)]
    preds = [_pred(i, p) for i, p in enumerate(pred_labels)]
    return preds, golds


class TestF1:
    def test_hand_arithmetic(self):
        # TP=3 FP=1 FN=2 -> P=0.75 R=0.6 F1=0.666...
        gold = [S, S, S, N, S, S, N]
        pred = [S, S, S, S, N, N, N]
        preds, golds = _paired(gold, pred)
        result = f1_score(preds, golds, dataset="d", model="m")
        assert result.f1 == pytest.approx(2 * 0.45 / 1.35, abs=1e-9)
        assert (result.tp, result.fp, result.fn, result.tn) == (3, 1, 2, 1)

    def test_perfect_and_zero_division(self):
        preds, golds = _paired([S, N, S], [S, N, S])
        assert f1_score(preds, golds).f1 == 1.0
        # nothing predicted positive: F1 0 by convention, not an error
        preds, golds = _paired([S, S, N], [N, N, N])
        assert f1_score(preds, golds).f1 == 0.0
        assert binary_f1(0, 0, 0) == 0.0
        assert binary_f1(0, 5, 5) == 0.0

    def test_permutation_invariance(self):
        rng = np.random.default_rng(0)
        gold = [S if b else N for b in rng.integers(0, 2, size=40)]
        pred = [S if b else N for b in rng.integers(0, 2, size=40)]
        preds, golds = _paired(gold, pred)
        base = f1_score(preds, golds)
        for _ in range(5):
            order = rng.permutation(40)
            shuffled = f1_score([preds[i] for i in order], [golds[i] for i in order])
            assert shuffled == base

    def test_alignment_errors(self):
        preds, golds = _paired([S, N], [S, N])
        with pytest.raises(AlignmentError, match="vs"):
            f1_score(preds[:1], golds)
        with pytest.raises(AlignmentError, match="aligned against"):
            f1_score(list(reversed(preds)), golds)
        with pytest.raises(ValueError, match="empty"):
            f1_score([], [])


def _result(model, dataset="riloff", f1=0.5):
    return RunResult(dataset=dataset, model=model, f1=f1, tp=1, fp=1, fn=1, tn=1)


class TestResultsTable:
    def test_csv_layout_and_model_order(self):
        table = results_table(
            [_result("EX-ED", f1=0.41), _result("SIARN", f1=0.33),
             _result("IN-SUMMARY", f1=0.52)]
        )
        lines = table.csv.splitlines()
        assert lines[0] == "dataset,model,f1,tp,fp,fn,tn"
        assert [line.split(",")[1] for line in lines[1:]] == [
            "SIARN", "EX-ED", "IN-SUMMARY"
        ]
        assert lines[1] == "riloff,SIARN,0.330,1,1,1,1"

    def test_group_best_stars_with_ties(self):
        table = results_table(
            [_result("EX-CASCADE", f1=0.60), _result("EX-ED", f1=0.60),
             _result("EX-SUMMARY", f1=0.40), _result("SIARN", f1=0.10)]
        )
        rows = {line.split()[0]: line for line in table.text.splitlines()[1:]}
        assert "0.600*" in rows["EX-CASCADE"]
        assert "0.600*" in rows["EX-ED"]
        assert "0.400*" not in rows["EX-SUMMARY"]
        # sole member of the baseline group is its own best
        assert "0.100*" in rows["SIARN"]

    def test_missing_dataset_cell_is_dash(self):
        table = results_table(
            [_result("SIARN", dataset="riloff"), _result("EX-ED", dataset="ptacek")]
        )
        rows = {line.split()[0]: line.split() for line in table.text.splitlines()}
        assert rows["model"][1:] == ["ptacek", "riloff"]
        assert rows["SIARN"][1] == "-"
        assert rows["EX-ED"][2] == "-"

    def test_duplicate_key_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            results_table([_result("SIARN"), _result("SIARN")])

    def test_empty_input_renders_headers_only(self):
        table = results_table([])
        assert table.csv == "dataset,model,f1,tp,fp,fn,tn\n"
        assert table.text == "model\n"

    def test_csv_and_text_share_numbers(self):
        results = [
            _result("SIARN", f1=0.123456), _result("EX-ED", f1=0.98),
            _result("IN-ED", f1=0.5),
        ]
        table = results_table(results)
        csv_values = {line.split(",")[2] for line in table.csv.splitlines()[1:]}
        text_values = {
            cell.rstrip("*")
            for line in table.text.splitlines()[1:]
            for cell in line.split()[1:]
        }
        assert csv_values == text_values == {"0.123", "0.980", "0.500"}
