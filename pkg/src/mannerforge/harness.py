"""Exact-match evaluation of externally produced predictions.

Exact match is token-for-token equality with the oracle target.  Alongside it
the report carries semantic validity, a strictly weaker auxiliary metric: the
share of predictions that execute without error and still satisfy the verb's
goal (a prediction with a redundant turn pair can be semantically valid yet
not an exact match).  Percentages are rendered with two decimals, rounding
half to even.
"""
from __future__ import annotations

import hashlib
import json
import multiprocessing
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal

from .errors import (
    DuplicatePrediction,
    MalformedRecord,
    MannerforgeError,
    MissingPrediction,
    UnknownIndex,
)
from .forge import Dataset, Example
from .pipeline import goal_satisfied
from .world import execute


@dataclass(frozen=True)
class PredictionRecord:
    index: int
    prediction: tuple[str, ...]


@dataclass(frozen=True)
class SplitMetrics:
    n: int
    matched: int
    semantically_valid: int

    @property
    def exact_match_percent(self) -> str:
        return _percent(self.matched, self.n)

    @property
    def semantic_valid_percent(self) -> str:
        return _percent(self.semantically_valid, self.n)


@dataclass(frozen=True)
class EvalReport:
    splits: dict
    dataset_digest: str
    predictions_digest: str

    def to_dict(self) -> dict:
        return {
            "splits": {
                name: {
                    "n": m.n,
                    "matched": m.matched,
                    "semantically_valid": m.semantically_valid,
                    "exact_match_percent": m.exact_match_percent,
                    "semantic_valid_percent": m.semantic_valid_percent,
                }
                for name, m in sorted(self.splits.items())
            },
            "dataset_digest": self.dataset_digest,
            "predictions_digest": self.predictions_digest,
        }


def _percent(numerator: int, denominator: int) -> str:
    if denominator == 0:
        return "0.00"
    value = Decimal(100 * numerator) / Decimal(denominator)
    return str(value.quantize(Decimal("0.01"), rounding=ROUND_HALF_EVEN))


def exact_match(prediction, target) -> bool:
    """Token-for-token equality, length included."""
    prediction = tuple(prediction)
    target = tuple(target)
    return prediction == target


def semantically_valid(example: Example, prediction) -> bool:
    """Does the prediction execute without error and satisfy the verb's goal?"""
    try:
        trajectory = execute(example.world, tuple(prediction))
    except MannerforgeError:
        return False
    return goal_satisfied(example.verb, example.world, trajectory)


def read_predictions(path: str) -> list[PredictionRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
                records.append(
                    PredictionRecord(index=int(data["index"]), prediction=tuple(data["prediction"]))
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise MalformedRecord(path, lineno, str(exc)) from None
    return records


def _semantic_chunk(pairs) -> list[bool]:
    return [semantically_valid(example, prediction) for example, prediction in pairs]


def evaluate(dataset: Dataset, predictions, split_names=None, jobs: int = 1) -> EvalReport:
    """Score predictions against every selected split's test set.

    Each evaluated test index must be predicted exactly once; predictions for
    known non-test indices are ignored, unknown indices are an error.  The
    per-record semantic checks fan out over `jobs` workers on large runs.
    """
    known = {ex.index for ex in dataset.examples}
    by_index: dict[int, tuple[str, ...]] = {}
    digest = hashlib.sha256()
    for record in predictions:
        if record.index not in known:
            raise UnknownIndex(f"prediction for index {record.index} not in dataset")
        if record.index in by_index:
            raise DuplicatePrediction(f"index {record.index} predicted more than once")
        by_index[record.index] = tuple(record.prediction)
        digest.update(
            json.dumps(
                {"index": record.index, "prediction": list(record.prediction)},
                sort_keys=True,
            ).encode("utf-8")
        )

    if split_names is None:
        selected = dict(dataset.splits)
    else:
        selected = {name: dataset.splits[name] for name in split_names}

    evaluated = set()
    for name, assignment in selected.items():
        for index in assignment.test:
            if index not in by_index:
                raise MissingPrediction(f"split {name!r}: no prediction for index {index}")
            evaluated.add(index)
    ordered = sorted(evaluated)

    exact_cache = {
        i: exact_match(by_index[i], dataset.example_by_index(i).target) for i in ordered
    }
    pairs = [(dataset.example_by_index(i), by_index[i]) for i in ordered]
    if jobs > 1 and len(pairs) >= 4 * jobs:
        chunk = max(1, len(pairs) // (jobs * 4))
        spans = [pairs[lo : lo + chunk] for lo in range(0, len(pairs), chunk)]
        with multiprocessing.Pool(jobs) as pool:
            flags = [flag for part in pool.map(_semantic_chunk, spans) for flag in part]
    else:
        flags = _semantic_chunk(pairs)
    valid_cache = dict(zip(ordered, flags))

    metrics: dict[str, SplitMetrics] = {}
    for name, assignment in selected.items():
        matched = sum(exact_cache[i] for i in assignment.test)
        valid = sum(valid_cache[i] for i in assignment.test)
        metrics[name] = SplitMetrics(
            n=len(assignment.test), matched=matched, semantically_valid=valid
        )

    dataset_digest = hashlib.sha256(
        json.dumps(dataset.manifest, sort_keys=True).encode("utf-8")
    ).hexdigest()
    return EvalReport(
        splits=metrics,
        dataset_digest=dataset_digest,
        predictions_digest=digest.hexdigest(),
    )


def dataset_stats(dataset: Dataset) -> dict:
    """Corpus statistics: sizes, vocabulary, verb/type/adverb distributions."""
    verbs: dict[str, int] = {}
    types: dict[str, int] = {}
    adverbs: dict[str, int] = {}
    lengths = []
    for ex in dataset.examples:
        verbs[ex.verb] = verbs.get(ex.verb, 0) + 1
        lengths.append(len(ex.target))
        if ex.adverb_surface:
            adverbs[ex.adverb_surface] = adverbs.get(ex.adverb_surface, 0) + 1
            types[ex.adverb_type] = types.get(ex.adverb_type, 0) + 1
    return {
        "num_examples": len(dataset.examples),
        "adverb_surfaces": len(adverbs),
        "verbs": dict(sorted(verbs.items())),
        "adverb_types": dict(sorted(types.items())),
        "no_adverb": len(dataset.examples) - sum(adverbs.values()),
        "target_length": {
            "mean": round(sum(lengths) / max(len(lengths), 1), 2),
            "max": max(lengths, default=0),
            "min": min(lengths, default=0),
        },
        "splits": {
            name: {"train": len(a.train), "test": len(a.test), "dropped": len(a.dropped)}
            for name, a in sorted(dataset.splits.items())
        },
    }
