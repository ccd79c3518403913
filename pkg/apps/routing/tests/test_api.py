from concurrent.futures import ThreadPoolExecutor

import pytest
from rest_framework.test import APIClient

from apps.routing.config import ServiceSettings
from apps.routing.runtime import RouterRuntime, load_runtime, set_runtime

REPAIR_QUERY = 'Replace brake pads for my Toyota Corolla 2015.'


def _without_timings(body):
    return {key: value for key, value in body.items() if key != '_timings'}


@pytest.fixture
def client():
    return APIClient()


@pytest.fixture
def loaded(desk_artifact):
    return load_runtime(ServiceSettings.from_django(model_path=str(desk_artifact)))


def test_healthz_reports_loading_until_the_runtime_exists(client, desk_artifact):
    assert client.get('/healthz').status_code == 503
    load_runtime(ServiceSettings.from_django(model_path=str(desk_artifact)))
    response = client.get('/healthz')
    assert response.status_code == 200
    body = response.json()
    assert body['status'] == 'ok'
    assert body['backend'] == 'mock'
    assert len(body['labels']) == 8
    assert 'others' not in body['prompt_tools']


def test_route_before_load_is_503(client):
    response = client.post('/v1/route', {'query': REPAIR_QUERY}, format='json')
    assert response.status_code == 503
    assert response.json()['error']['code'] == 'router_not_ready'


def test_route_returns_tool_entities_and_timings(client, loaded):
    response = client.post('/v1/route', {'query': REPAIR_QUERY}, format='json')
    assert response.status_code == 200
    body = response.json()
    assert body['tool_category'] == 'repair_to_parts'
    assert body['entities'] == {
        'make': 'Toyota', 'model': 'Corolla', 'year': 2015, 'labor_action': 'replace', 'component': 'brake pads',
    }
    assert set(body['_timings']) == {'classify_seconds', 'extract_seconds', 'total_seconds'}


def test_route_single_step_mode(client, loaded):
    response = client.post('/v1/route', {'query': REPAIR_QUERY, 'mode': 'single_step'}, format='json')
    assert response.status_code == 200
    assert response.json()['tool_category'] == 'repair_to_parts'
    assert response.json()['_timings']['classify_seconds'] == 0.0


@pytest.mark.parametrize('body', [{}, {'query': ''}, {'query': '   '}, {'query': 'x', 'mode': 'three_step'}])
def test_invalid_bodies_are_400(client, loaded, body):
    response = client.post('/v1/route', body, format='json')
    assert response.status_code == 400
    assert response.json()['error']['code'] == 'invalid_query'


def test_oversized_query_is_400(client, loaded, settings):
    settings.QUERY_ROUTER = {**settings.QUERY_ROUTER, 'MAX_QUERY_BYTES': 16}
    response = client.post('/v1/route', {'query': 'brake pads for my Toyota Corolla'}, format='json')
    assert response.status_code == 400


def test_malformed_json_is_422(client, loaded):
    response = client.post('/v1/route', data='{"query": ', content_type='application/json')
    assert response.status_code == 422
    assert response.json()['error']['code'] == 'malformed_json'


def test_classify_returns_a_distribution(client, loaded):
    response = client.post('/v1/classify', {'query': REPAIR_QUERY}, format='json')
    assert response.status_code == 200
    body = response.json()
    assert body['tool_category'] == 'repair_to_parts'
    assert len(body['probabilities']) == 8
    assert sum(body['probabilities'].values()) == pytest.approx(1.0)


def test_backend_failure_is_502_with_the_tool(client, desk_artifact, failing_backend):
    settings = ServiceSettings.from_django(model_path=str(desk_artifact))
    set_runtime(RouterRuntime.from_settings(settings, backend=failing_backend))

    response = client.post('/v1/route', {'query': REPAIR_QUERY}, format='json')
    assert response.status_code == 502
    body = response.json()
    assert body['tool_category'] == 'repair_to_parts'
    assert body['error']['code'] == 'backend_transport_error'

    response = client.post('/v1/route', {'query': REPAIR_QUERY, 'mode': 'single_step'}, format='json')
    assert response.status_code == 502
    assert 'tool_category' not in response.json()


def test_concurrent_requests_match_serial_results(loaded, desk):
    queries = [sample.query for sample in desk.holdout[:32]]

    def post(query):
        return APIClient().post('/v1/route', {'query': query}, format='json').json()

    serial = [post(query) for query in queries]
    with ThreadPoolExecutor(max_workers=8) as executor:
        concurrent = list(executor.map(post, queries))

    assert [_without_timings(body) for body in concurrent] == [_without_timings(body) for body in serial]
