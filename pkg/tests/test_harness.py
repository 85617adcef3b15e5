import json
import random

import pytest

from mannerforge.errors import (
    DuplicatePrediction,
    MalformedRecord,
    MissingPrediction,
    UnknownIndex,
)
from mannerforge.forge import (
    ForgeConfig,
    SplitSpec,
    build_lexicon,
    build_splits,
    generate_examples,
    write_dataset,
    read_dataset,
)
from mannerforge.harness import (
    PredictionRecord,
    _percent,
    dataset_stats,
    evaluate,
    exact_match,
    read_predictions,
    semantically_valid,
)
from mannerforge.seeding import derive_rng

CAUTIOUS_SEQ = (
    "turn_left turn_left turn_right turn_right turn_left walk "
    "turn_left turn_right turn_right turn_left walk "
    "turn_left turn_left turn_right turn_right turn_left walk "
    "turn_left turn_right turn_right turn_left walk"
).split()


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    cfg = ForgeConfig(
        seed=29,
        num_examples=1250,
        extra_adverbs=0,
        splits=(
            SplitSpec(kind="random", name="random", test_fraction=0.8),
            SplitSpec(kind="verb_adverb_holdout", name="pull_spin",
                      verb="pull", surface="while spinning"),
        ),
    )
    lexicon = build_lexicon(cfg)
    examples = list(generate_examples(cfg, lexicon))
    splits = build_splits(examples, cfg.splits, derive_rng(cfg.seed, "splits"))
    out = tmp_path_factory.mktemp("ds")
    write_dataset(examples, lexicon, splits, cfg, str(out))
    return read_dataset(str(out))


def gold_predictions(dataset):
    return [PredictionRecord(ex.index, ex.target) for ex in dataset.examples]


class TestExactMatch:
    def test_identity(self):
        assert exact_match(CAUTIOUS_SEQ, CAUTIOUS_SEQ)

    def test_length_mismatch(self):
        assert not exact_match(("walk",), ("walk", "walk"))

    def test_single_token_perturbation(self):
        flipped = list(CAUTIOUS_SEQ)
        flipped[0] = "turn_right"
        assert not exact_match(flipped, CAUTIOUS_SEQ)


class TestPercentFormatting:
    def test_two_decimals(self):
        assert _percent(999, 1000) == "99.90"
        assert _percent(1000, 1000) == "100.00"
        assert _percent(0, 7) == "0.00"

    def test_round_half_even(self):
        assert _percent(1, 800) == "0.12"   # 0.125 rounds to even neighbour
        assert _percent(3, 800) == "0.38"   # 0.375 rounds up to the even 8
        assert _percent(1, 8) == "12.50"


class TestEvaluate:
    def test_gold_predictions_score_100(self, dataset):
        report = evaluate(dataset, gold_predictions(dataset))
        for name, metrics in report.splits.items():
            if metrics.n:
                assert metrics.exact_match_percent == "100.00"
                assert metrics.semantic_valid_percent == "100.00"

    def test_one_corrupted_record_in_1000(self, dataset):
        assert len(dataset.splits["random"].test) == 1000
        predictions = gold_predictions(dataset)
        victim = dataset.splits["random"].test[0]
        predictions = [
            PredictionRecord(p.index, ("walk", "walk", "walk") if p.index == victim else p.prediction)
            for p in predictions
        ]
        report = evaluate(dataset, predictions, split_names=["random"])
        assert report.splits["random"].exact_match_percent == "99.90"

    def test_missing_prediction(self, dataset):
        preds = gold_predictions(dataset)[:-200]
        with pytest.raises(MissingPrediction):
            evaluate(dataset, preds)

    def test_duplicate_prediction(self, dataset):
        preds = gold_predictions(dataset)
        with pytest.raises(DuplicatePrediction):
            evaluate(dataset, preds + [preds[0]])

    def test_unknown_index(self, dataset):
        preds = gold_predictions(dataset) + [PredictionRecord(10 ** 9, ("walk",))]
        with pytest.raises(UnknownIndex):
            evaluate(dataset, preds)

    def test_order_invariance(self, dataset):
        preds = gold_predictions(dataset)
        shuffled = preds[:]
        random.Random(1).shuffle(shuffled)
        a = evaluate(dataset, preds)
        b = evaluate(dataset, shuffled)
        assert a.splits == b.splits
        assert a.dataset_digest == b.dataset_digest

    def test_semantic_validity_strictly_weaker(self, dataset):
        # A redundant turn pair keeps the trajectory but breaks exact match.
        walk_examples = [ex for ex in dataset.examples if ex.verb == "walk" and ex.target]
        ex = walk_examples[0]
        padded = ("turn_left", "turn_right") + ex.target
        assert not exact_match(padded, ex.target)
        assert semantically_valid(ex, padded)
        # and exact match always implies semantic validity on forge output
        for sample in dataset.examples[:100]:
            assert semantically_valid(sample, sample.target)

    def test_report_digests_are_stable(self, dataset):
        a = evaluate(dataset, gold_predictions(dataset))
        b = evaluate(dataset, gold_predictions(dataset))
        assert a == b


class TestPredictionIO:
    def test_read_predictions(self, tmp_path):
        path = tmp_path / "preds.ndrec"
        path.write_text(
            '{"index": 0, "prediction": ["walk"]}\n'
            '{"index": 1, "prediction": ["turn_left", "walk"]}\n'
        )
        records = read_predictions(str(path))
        assert records == [
            PredictionRecord(0, ("walk",)),
            PredictionRecord(1, ("turn_left", "walk")),
        ]

    def test_malformed_prediction_line(self, tmp_path):
        path = tmp_path / "preds.ndrec"
        path.write_text('{"index": 0, "prediction": ["walk"]}\n{"index": 1}\n')
        with pytest.raises(MalformedRecord) as err:
            read_predictions(str(path))
        assert err.value.line == 2


class TestStats:
    def test_stats_shape(self, dataset):
        stats = dataset_stats(dataset)
        assert stats["num_examples"] == 1250
        assert stats["adverb_surfaces"] == 4
        assert set(stats["verbs"]) <= {"walk", "push", "pull"}
        assert stats["splits"]["random"]["test"] == 1000
        assert stats["target_length"]["max"] >= stats["target_length"]["min"]
        json.dumps(stats)  # must be serializable as-is
