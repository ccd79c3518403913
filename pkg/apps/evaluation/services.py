"""
Evaluation harness
Classification metrics, field-wise semantic scoring of extracted
entities, and latency statistics.
"""
import json
import logging
import math
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from apps.classifier.services import predict
from apps.registry.services import ToolCategory, default_registry
from query_router.exceptions import QueryRouterError

from .exceptions import EmptyInput, SchemaMismatch, SynonymFileError

logger = logging.getLogger(__name__)

BUNDLED_SYNONYMS_PATH = Path(__file__).resolve().parent / 'data' / 'synonyms.json'

WHITESPACE_RUN = re.compile(r'\s+')


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int

    def to_dict(self):
        return {'precision': self.precision, 'recall': self.recall, 'f1': self.f1, 'support': self.support}


@dataclass(frozen=True, eq=False)
class ClassificationReport:
    accuracy: float
    macro_f1: float
    weighted_f1: float
    per_class: dict
    confusion: np.ndarray
    labels: tuple
    n: int

    def to_dict(self):
        return {
            'n': self.n,
            'accuracy': self.accuracy,
            'macro_f1': self.macro_f1,
            'weighted_f1': self.weighted_f1,
            'per_class': {str(tool): metrics.to_dict() for tool, metrics in self.per_class.items()},
            'labels': [str(tool) for tool in self.labels],
            'confusion': self.confusion.tolist(),
        }


def evaluate_classification(pairs):
    """
    Metrics over (gold, predicted) pairs. Confusion rows are gold tools,
    columns predicted, both in registry order. Macro F1 averages classes
    with gold support only.
    """
    if not pairs:
        raise EmptyInput('Cannot evaluate classification on zero samples')
    labels = tuple(ToolCategory)
    index = {tool: position for position, tool in enumerate(labels)}
    confusion = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for gold, predicted in pairs:
        confusion[index[gold], index[predicted]] += 1

    total = int(confusion.sum())
    true_positives = np.diag(confusion)
    supports = confusion.sum(axis=1)
    predicted_counts = confusion.sum(axis=0)

    per_class = {}
    for position, tool in enumerate(labels):
        tp = int(true_positives[position])
        precision = tp / predicted_counts[position] if predicted_counts[position] else 0.0
        recall = tp / supports[position] if supports[position] else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[tool] = ClassMetrics(float(precision), float(recall), float(f1), int(supports[position]))

    supported = [metrics for metrics in per_class.values() if metrics.support > 0]
    macro_f1 = sum(metrics.f1 for metrics in supported) / len(supported)
    weighted_f1 = sum(metrics.f1 * metrics.support for metrics in supported) / total
    return ClassificationReport(
        accuracy=float(np.trace(confusion)) / total,
        macro_f1=macro_f1,
        weighted_f1=weighted_f1,
        per_class=per_class,
        confusion=confusion,
        labels=labels,
        n=total,
    )


class SynonymTable:
    """Groups of interchangeable normalized strings, e.g. chevy <-> chevrolet."""

    def __init__(self, groups=()):
        self._canonical = {}
        for group in groups:
            members = [normalize_value(term) for term in group]
            for member in members:
                self._canonical.setdefault(member, members[0])

    @classmethod
    def from_json(cls, path):
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding='utf-8'))
            groups = raw['groups']
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise SynonymFileError(f'Cannot read synonym table {path}: {exc}', path=str(path))
        if not all(isinstance(group, list) for group in groups):
            raise SynonymFileError(f'Synonym table {path}: groups must be lists of strings', path=str(path))
        return cls(groups)

    def canonical(self, value):
        return self._canonical.get(value, value)

    def __len__(self):
        return len(self._canonical)


@lru_cache(maxsize=4)
def load_synonyms(path=None):
    return SynonymTable.from_json(path or BUNDLED_SYNONYMS_PATH)


def normalize_value(value):
    return WHITESPACE_RUN.sub(' ', str(value).lower()).strip()


@dataclass(frozen=True)
class FieldDiff:
    field: str
    gold: object
    predicted: object

    def to_dict(self):
        return {'field': self.field, 'gold': self.gold, 'predicted': self.predicted}


def _values_match(spec, gold, predicted, synonyms):
    if gold is None or predicted is None:
        return gold is None and predicted is None
    if spec.value_kind == 'integer':
        try:
            return int(gold) == int(predicted)
        except (TypeError, ValueError):
            return False
    gold, predicted = normalize_value(gold), normalize_value(predicted)
    if synonyms is not None:
        gold, predicted = synonyms.canonical(gold), synonyms.canonical(predicted)
    return gold == predicted


def semantic_match(gold, predicted, schema, synonyms=None):
    """(passed, field diffs); a sample passes only when every field matches."""
    expected = set(schema.field_names)
    for side, entities in (('gold', gold), ('predicted', predicted)):
        if set(entities) != expected:
            raise SchemaMismatch(
                f'{side} entities do not match the {schema.tool} schema',
                side=side,
                missing=sorted(expected - set(entities)),
                unexpected=sorted(set(entities) - expected),
            )
    diffs = [
        FieldDiff(spec.name, gold[spec.name], predicted[spec.name])
        for spec in schema.fields
        if not _values_match(spec, gold[spec.name], predicted[spec.name], synonyms)
    ]
    return not diffs, diffs


@dataclass(frozen=True)
class SampleOutcome:
    id: int
    query: str
    gold_tool: ToolCategory
    predicted_tool: ToolCategory
    passed: bool
    field_diffs: tuple = ()
    error: dict = None

    def to_dict(self):
        return {
            'id': self.id,
            'query': self.query,
            'gold_tool': str(self.gold_tool),
            'predicted_tool': str(self.predicted_tool) if self.predicted_tool else None,
            'pass': self.passed,
            'field_diffs': [diff.to_dict() for diff in self.field_diffs],
            'error': self.error,
        }


@dataclass(frozen=True)
class ExtractionReport:
    n: int
    passes: int
    pass_rate: float
    per_sample: list
    per_field_mismatch_counts: dict
    empty: bool = False

    def to_dict(self):
        return {
            'n': self.n,
            'passes': self.passes,
            'pass_rate': self.pass_rate,
            'empty': self.empty,
            'per_field_mismatch_counts': self.per_field_mismatch_counts,
            'per_sample': [outcome.to_dict() for outcome in self.per_sample],
        }


def _score_sample(index, sample, route_fn, registry, synonyms):
    try:
        result = route_fn(sample.query)
    except QueryRouterError as exc:
        return SampleOutcome(index, sample.query, sample.tool, None, False, error=exc.to_dict())

    if result.tool != sample.tool:
        return SampleOutcome(
            index, sample.query, sample.tool, result.tool, False,
            error={'code': 'wrong_tool', 'message': f'routed to {result.tool}'},
        )
    if result.error:
        return SampleOutcome(index, sample.query, sample.tool, result.tool, False, error=result.error)

    schema = registry.schema_for(sample.tool)
    try:
        gold = registry.validate_entities(sample.tool, sample.entities)
        passed, diffs = semantic_match(gold, result.entities, schema, synonyms)
    except QueryRouterError as exc:
        return SampleOutcome(index, sample.query, sample.tool, result.tool, False, error=exc.to_dict())
    return SampleOutcome(index, sample.query, sample.tool, result.tool, passed, tuple(diffs))


def evaluate_extraction(samples, route_fn, registry=None, synonyms=None, parallelism=1):
    """
    Route every sample and score its entities against gold. A sample
    routed to the wrong tool fails whatever its entities. Route calls run
    on up to `parallelism` threads; outcomes keep dataset order.
    """
    registry = registry or default_registry()
    if not samples:
        logger.warning("Extraction evaluation ran on an empty dataset")
        return ExtractionReport(n=0, passes=0, pass_rate=0.0, per_sample=[], per_field_mismatch_counts={}, empty=True)

    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        outcomes = list(pool.map(
            lambda item: _score_sample(item[0], item[1], route_fn, registry, synonyms),
            enumerate(samples),
        ))

    mismatches = {}
    for outcome in outcomes:
        for diff in outcome.field_diffs:
            mismatches[diff.field] = mismatches.get(diff.field, 0) + 1
    passes = sum(1 for outcome in outcomes if outcome.passed)
    return ExtractionReport(
        n=len(outcomes),
        passes=passes,
        pass_rate=passes / len(outcomes),
        per_sample=outcomes,
        per_field_mismatch_counts=dict(sorted(mismatches.items())),
    )


@dataclass(frozen=True)
class LatencyReport:
    n: int
    mean_seconds: float
    p50_seconds: float
    p95_seconds: float

    def to_dict(self):
        return {
            'n': self.n,
            'mean_seconds': self.mean_seconds,
            'p50_seconds': self.p50_seconds,
            'p95_seconds': self.p95_seconds,
        }


def _nearest_rank(ordered, q):
    rank = max(1, math.ceil(q * len(ordered)))
    return ordered[rank - 1]


def latency_stats(samples):
    """Mean and nearest-rank p50/p95 of latencies in seconds."""
    if not samples:
        raise EmptyInput('Cannot compute latency statistics on zero samples')
    ordered = sorted(float(value) for value in samples)
    return LatencyReport(
        n=len(ordered),
        mean_seconds=sum(ordered) / len(ordered),
        p50_seconds=_nearest_rank(ordered, 0.50),
        p95_seconds=_nearest_rank(ordered, 0.95),
    )


@dataclass(frozen=True)
class ClassificationRun:
    report: ClassificationReport
    latency: LatencyReport


def classify_samples(model, samples, clock=time.perf_counter):
    """Predict every sample, timing each prediction."""
    if not samples:
        raise EmptyInput('Cannot classify zero samples')
    pairs, seconds = [], []
    for sample in samples:
        started = clock()
        predicted = predict(model, sample.query).tool
        seconds.append(clock() - started)
        pairs.append((sample.tool, predicted))
    return ClassificationRun(report=evaluate_classification(pairs), latency=latency_stats(seconds))
