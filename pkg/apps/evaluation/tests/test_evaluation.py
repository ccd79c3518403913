import json

import numpy as np
import pytest

from apps.datasets.services import SeedSample
from apps.evaluation.exceptions import EmptyInput, SchemaMismatch, SynonymFileError
from apps.evaluation.reports import classification_text, comparison_text, extraction_text, latency_text
from apps.evaluation.services import (
    SynonymTable,
    classify_samples,
    evaluate_classification,
    evaluate_extraction,
    latency_stats,
    load_synonyms,
    semantic_match,
)
from apps.registry.services import ToolCategory
from apps.routing.services import RouteResult, StageTimings, compare_modes, route_two_step

TOOLS = list(ToolCategory)


def _reference_metrics(pairs):
    """Per-class precision/recall/F1 counted pair by pair."""
    metrics = {}
    for tool in TOOLS:
        tp = sum(1 for gold, predicted in pairs if gold == tool and predicted == tool)
        predicted_count = sum(1 for _, predicted in pairs if predicted == tool)
        support = sum(1 for gold, _ in pairs if gold == tool)
        precision = tp / predicted_count if predicted_count else 0.0
        recall = tp / support if support else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        metrics[tool] = (precision, recall, f1, support)
    return metrics


def _fixed_route(tool, entities=None, error=None):
    def route(query):
        return RouteResult(tool=tool, entities=entities or {}, timings=StageTimings(), mode='two_step', error=error)
    return route


def test_metrics_match_a_pairwise_count():
    rng = np.random.default_rng(11)
    for _ in range(100):
        size = int(rng.integers(1, 60))
        pairs = [(TOOLS[int(rng.integers(8))], TOOLS[int(rng.integers(8))]) for _ in range(size)]
        report = evaluate_classification(pairs)
        reference = _reference_metrics(pairs)

        assert report.n == size
        assert report.accuracy == pytest.approx(sum(gold == predicted for gold, predicted in pairs) / size, abs=1e-12)
        supported = [values for values in reference.values() if values[3]]
        assert report.macro_f1 == pytest.approx(sum(values[2] for values in supported) / len(supported), abs=1e-12)
        assert report.weighted_f1 == pytest.approx(sum(values[2] * values[3] for values in supported) / size, abs=1e-12)
        for tool, (precision, recall, f1, support) in reference.items():
            metrics = report.per_class[tool]
            assert (metrics.precision, metrics.recall, metrics.f1) == pytest.approx((precision, recall, f1), abs=1e-12)
            assert metrics.support == support
        assert int(report.confusion.sum()) == size


def test_confusion_rows_are_gold_and_columns_predicted():
    report = evaluate_classification([(ToolCategory.TSB, ToolCategory.NHTSA)])
    assert report.confusion[0, 1] == 1
    assert report.macro_f1 == 0.0
    assert report.to_dict()['confusion'][0][1] == 1


def test_no_pairs_is_an_error():
    with pytest.raises(EmptyInput):
        evaluate_classification([])


def test_semantic_match_normalizes_case_and_whitespace(registry):
    schema = registry.schema_for(ToolCategory.REPAIR_TO_PARTS)
    gold = {'make': 'Toyota', 'model': 'Corolla', 'year': 2015, 'labor_action': 'replace', 'component': 'brake pads'}
    predicted = {'make': ' toyota', 'model': 'COROLLA', 'year': 2015, 'labor_action': 'Replace', 'component': 'Brake  Pads'}
    assert semantic_match(gold, predicted, schema) == (True, [])


def test_semantic_match_uses_synonyms_only_when_given(registry):
    schema = registry.schema_for(ToolCategory.TSB)
    gold = {'make': 'Chevrolet', 'model': 'Malibu', 'year': 2016, 'issue': None}
    predicted = {'make': 'Chevy', 'model': 'Malibu', 'year': 2016, 'issue': None}

    passed, diffs = semantic_match(gold, predicted, schema)
    assert not passed
    assert [diff.to_dict() for diff in diffs] == [{'field': 'make', 'gold': 'Chevrolet', 'predicted': 'Chevy'}]
    assert semantic_match(gold, predicted, schema, load_synonyms()) == (True, [])


def test_semantic_match_null_only_matches_null(registry):
    schema = registry.schema_for(ToolCategory.TSB)
    gold = {'make': 'Ford', 'model': None, 'year': None, 'issue': None}
    predicted = {'make': 'Ford', 'model': 'Focus', 'year': None, 'issue': None}
    passed, diffs = semantic_match(gold, predicted, schema)
    assert not passed
    assert diffs[0].field == 'model'


def test_semantic_match_rejects_off_schema_maps(registry):
    schema = registry.schema_for(ToolCategory.TSB)
    with pytest.raises(SchemaMismatch):
        semantic_match({'make': 'Ford'}, {'make': 'Ford', 'model': None, 'year': None, 'issue': None}, schema)


def test_synonym_file_errors(tmp_path):
    bad = tmp_path / 'synonyms.json'
    bad.write_text(json.dumps({'groups': 'chevy'}))
    with pytest.raises(SynonymFileError):
        SynonymTable.from_json(bad)
    with pytest.raises(SynonymFileError):
        SynonymTable.from_json(tmp_path / 'missing.json')


def test_extraction_on_canonical_passes(desk, desk_model, pool, registry, mock_backend):
    report = evaluate_extraction(
        desk.canonical,
        lambda query: route_two_step(query, desk_model, pool, registry, mock_backend),
        registry,
        parallelism=4,
    )
    assert report.n == len(desk.canonical)
    assert report.pass_rate == 1.0
    assert [outcome.id for outcome in report.per_sample] == list(range(len(desk.canonical)))
    assert 'pass_rate 1.0000' in extraction_text(report)


def test_wrong_tool_fails_even_with_matching_entities(registry):
    sample = SeedSample('2015 Ford F-150 bulletins', ToolCategory.TSB, {'make': 'Ford'})
    entities = {'make': 'Ford', 'model': None, 'year': None, 'mileage': None, 'issue': None}
    report = evaluate_extraction([sample], _fixed_route(ToolCategory.NHTSA, entities), registry)
    assert report.passes == 0
    assert report.per_sample[0].error['code'] == 'wrong_tool'
    assert report.per_sample[0].to_dict()['pass'] is False


def test_route_errors_count_as_failures(registry):
    sample = SeedSample('2015 Ford F-150 bulletins', ToolCategory.TSB, {'make': 'Ford'})
    error = {'code': 'backend_timeout', 'message': 'slow'}
    report = evaluate_extraction([sample], _fixed_route(ToolCategory.TSB, error=error), registry)
    assert report.pass_rate == 0.0
    assert report.per_sample[0].error == error


def test_field_mismatches_are_counted(registry):
    samples = [
        SeedSample('q1', ToolCategory.TSB, {'make': 'Ford', 'year': 2015}),
        SeedSample('q2', ToolCategory.TSB, {'make': 'Kia', 'year': 2015}),
    ]
    predicted = {'make': 'Ford', 'model': None, 'year': 2014, 'issue': None}
    report = evaluate_extraction(samples, _fixed_route(ToolCategory.TSB, predicted), registry)
    assert report.per_field_mismatch_counts == {'make': 1, 'year': 2}


def test_empty_dataset_reports_zero(registry):
    report = evaluate_extraction([], _fixed_route(ToolCategory.OTHERS), registry)
    assert report.empty
    assert report.pass_rate == 0.0
    assert extraction_text(report).startswith('extraction: no samples')


@pytest.mark.parametrize('samples, expected', [
    ([0.1, 0.2, 0.3, 0.4], (0.25, 0.2, 0.4)),
    ([0.5], (0.5, 0.5, 0.5)),
    ([3.0, 1.0, 2.0], (2.0, 2.0, 3.0)),
    (list(range(1, 21)), (10.5, 10, 19)),
])
def test_latency_stats_nearest_rank(samples, expected):
    report = latency_stats(samples)
    assert (report.mean_seconds, report.p50_seconds, report.p95_seconds) == pytest.approx(expected)
    assert report.n == len(samples)


def test_latency_stats_needs_samples():
    with pytest.raises(EmptyInput):
        latency_stats([])


def test_classify_samples_on_holdout(desk, desk_model):
    run = classify_samples(desk_model, desk.holdout)
    assert run.report.n == len(desk.holdout)
    assert run.report.accuracy >= 0.85
    assert run.latency.n == len(desk.holdout)
    text = classification_text(run.report)
    assert text.startswith('accuracy')
    assert 'gold \\ predicted' in text
    assert 'p95_s' in latency_text(run.latency)


def test_comparison_text(desk, desk_model, pool, registry):
    assert comparison_text(compare_modes([], desk_model, pool, registry)) == 'no queries compared'
    comparison = compare_modes([desk.canonical[0].query], desk_model, pool, registry)
    assert 'tool agreement 1.0000' in comparison_text(comparison)
