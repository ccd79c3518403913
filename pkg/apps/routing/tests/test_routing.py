import json

import pytest

from apps.evaluation.services import semantic_match
from apps.extraction.backends import LatencyModel, MockChatBackend
from apps.extraction.parsing import FAILED
from apps.registry.services import ToolCategory
from apps.routing.exceptions import InvalidQuery
from apps.routing.services import (
    SINGLE_STEP,
    TWO_STEP,
    SimulatedClock,
    compare_modes,
    route_single_step,
    route_two_step,
)


def test_two_step_routes_canonical_queries(desk, desk_model, pool, registry, mock_backend):
    for sample in desk.canonical:
        result = route_two_step(sample.query, desk_model, pool, registry, mock_backend)
        assert result.tool == sample.tool, sample.query
        assert result.ok
        assert result.mode == TWO_STEP
        if sample.tool != ToolCategory.OTHERS:
            passed, diffs = semantic_match(sample.entities, result.entities, registry.schema_for(sample.tool))
            assert passed, diffs


def test_others_skips_extraction(desk_model, pool, registry, mock_backend):
    query = 'What are the negative aspects of choosing an aftermarket brake pad over an OEM part?'
    result = route_two_step(query, desk_model, pool, registry, mock_backend)
    assert result.tool == ToolCategory.OTHERS
    assert result.entities == {}
    assert result.timings.extract_seconds == 0.0
    assert mock_backend.requests_sent == 0
    assert result.to_public() == {'tool_category': 'others', 'entities': {}}


def test_two_step_sends_one_request(desk_model, pool, registry, mock_backend):
    route_two_step('Replace brake pads for my Toyota Corolla 2015.', desk_model, pool, registry, mock_backend)
    assert mock_backend.requests_sent == 1


def test_failing_backend_keeps_the_classified_tool(desk_model, pool, registry, failing_backend):
    result = route_two_step(
        'What parts are needed to replace spark plugs in a 2018 Honda Accord?',
        desk_model, pool, registry, failing_backend,
    )
    assert result.tool == ToolCategory.REPAIR_TO_PARTS
    assert result.entities == {}
    assert result.parse_status == FAILED
    assert result.error['code'] == 'backend_transport_error'
    assert result.backend_failed
    assert failing_backend.calls == 1


def test_unparseable_completion_is_not_a_backend_failure(desk_model, pool, registry, scripted_backend):
    backend = scripted_backend('sorry, no idea')
    result = route_two_step('Is there any TSB for a 2015 Subaru Forester?', desk_model, pool, registry, backend)
    assert result.error['code'] == 'no_json_found'
    assert not result.backend_failed


def test_single_step_agrees_with_two_step_on_canonical(desk, desk_model, pool, registry, mock_backend):
    for sample in desk.canonical:
        single = route_single_step(sample.query, pool, registry, mock_backend)
        two = route_two_step(sample.query, desk_model, pool, registry, mock_backend)
        assert single.mode == SINGLE_STEP
        assert single.tool == two.tool
        assert single.entities == two.entities


def test_single_step_unknown_label_routes_to_others(pool, registry, scripted_backend):
    backend = scripted_backend('{"tool_category": "banana", "entities": {"make": "Ford"}}')
    result = route_single_step('Ford recall?', pool, registry, backend)
    assert result.tool == ToolCategory.OTHERS
    assert result.entities == {}
    assert result.error['code'] == 'unknown_tool_label'
    assert result.error['label'] == 'banana'


def test_single_step_validates_against_the_named_tool(pool, registry, scripted_backend):
    backend = scripted_backend(json.dumps({'tool_category': 'tsb', 'entities': {'make': 'Ford', 'year': '2015'}}))
    result = route_single_step('Ford TSB 2015', pool, registry, backend)
    assert result.tool == ToolCategory.TSB
    assert result.entities == {'make': 'Ford', 'model': None, 'year': 2015, 'issue': None}


def _ticking_clock(*ticks):
    values = iter(ticks)
    return lambda: next(values)


@pytest.mark.parametrize('completion, tool, timings', [
    ('{"tool_category": "others", "entities": {}}', ToolCategory.OTHERS, (0.25, 0.0, 0.25)),
    ('{"tool_category": "banana", "entities": {}}', ToolCategory.OTHERS, (0.25, 0.0, 0.25)),
    ('no json at all', ToolCategory.OTHERS, (0.25, 0.0, 0.25)),
    ('{"tool_category": "tsb", "entities": {"make": "Ford"}}', ToolCategory.TSB, (0.0, 0.25, 0.25)),
])
def test_single_step_others_reports_no_extraction_time(pool, registry, scripted_backend, completion, tool, timings):
    backend = scripted_backend(completion)
    result = route_single_step('Ford question', pool, registry, backend, clock=_ticking_clock(1.0, 1.25))
    assert result.tool == tool
    assert (result.timings.classify_seconds, result.timings.extract_seconds, result.timings.total_seconds) == timings


def test_single_step_prompt_lists_every_tool(pool, registry, scripted_backend):
    backend = scripted_backend('{"tool_category": "others", "entities": {}}')
    route_single_step('anything', pool, registry, backend)
    for tool in ToolCategory:
        assert tool.value in backend.prompts[0]


@pytest.mark.parametrize('query', ['', '   ', None])
def test_blank_queries_are_rejected_before_any_request(query, desk_model, pool, registry, scripted_backend):
    backend = scripted_backend('{}')
    with pytest.raises(InvalidQuery):
        route_two_step(query, desk_model, pool, registry, backend)
    with pytest.raises(InvalidQuery):
        route_single_step(query, pool, registry, backend)
    assert backend.prompts == []


def test_simulated_clock_advances_on_sleep():
    clock = SimulatedClock(base=lambda: 10.0)
    clock.sleep(0.25)
    clock.sleep(0.5)
    assert clock() == pytest.approx(10.75)


def test_two_step_is_faster_under_a_token_latency_model(desk, desk_model, pool, registry):
    queries = [sample.query for sample in desk.canonical]
    comparison = compare_modes(queries, desk_model, pool, registry, latency=LatencyModel(0.005, 0.0005))
    rows = {row.mode: row.latency for row in comparison.modes}

    assert comparison.n == len(queries)
    assert [row.mode for row in comparison.modes] == [TWO_STEP, SINGLE_STEP]
    assert rows[TWO_STEP].mean_seconds < rows[SINGLE_STEP].mean_seconds
    assert comparison.agreement_rate == 1.0


def test_two_step_is_faster_across_holdout_and_canonical(desk, desk_model, pool, registry):
    queries = [sample.query for sample in desk.holdout + desk.canonical]
    comparison = compare_modes(queries, desk_model, pool, registry, latency=LatencyModel(0.005, 0.0005))
    rows = {row.mode: row.latency for row in comparison.modes}

    assert comparison.n == 48
    assert rows[TWO_STEP].mean_seconds < rows[SINGLE_STEP].mean_seconds
    assert rows[TWO_STEP].p50_seconds < rows[SINGLE_STEP].p50_seconds


def test_prompt_length_alone_orders_the_modes(desk, desk_model, pool, registry):
    queries = [sample.query for sample in desk.holdout]
    comparison = compare_modes(queries, desk_model, pool, registry, latency=LatencyModel(0.0, 0.0005))
    rows = {row.mode: row.latency for row in comparison.modes}
    assert rows[TWO_STEP].mean_seconds < rows[SINGLE_STEP].mean_seconds


def test_compare_with_no_queries(desk_model, pool, registry):
    comparison = compare_modes([], desk_model, pool, registry)
    assert comparison.to_dict() == {'n': 0, 'modes': [], 'agreement_rate': None}


def test_compare_uses_a_given_backend(desk, desk_model, pool, registry):
    backend = MockChatBackend(model=desk_model, registry=registry)
    queries = [sample.query for sample in desk.canonical]
    compare_modes(queries, desk_model, pool, registry, backend=backend)
    others = sum(1 for sample in desk.canonical if sample.tool == ToolCategory.OTHERS)
    assert backend.requests_sent == 2 * len(queries) - others
