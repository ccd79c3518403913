import json
from io import StringIO

import pytest
from django.core.management import call_command

from apps.extraction.backends import HttpChatBackend
from apps.extraction.exceptions import BackendTransportError

REPAIR_QUERY = 'Replace brake pads for my Toyota Corolla 2015.'


def _run(*args):
    out, err = StringIO(), StringIO()
    call_command(*args, stdout=out, stderr=err)
    return json.loads(out.getvalue()), err.getvalue()


def test_route_prints_tool_and_entities(desk_artifact):
    body, _ = _run('route', '--query', REPAIR_QUERY, '--model', str(desk_artifact))
    assert body == {
        'tool_category': 'repair_to_parts',
        'entities': {
            'make': 'Toyota', 'model': 'Corolla', 'year': 2015, 'labor_action': 'replace', 'component': 'brake pads',
        },
    }


def test_route_timings_and_diagnostics(desk_artifact):
    body, err = _run('route', '--query', REPAIR_QUERY, '--model', str(desk_artifact), '--timings', '--diagnostics')
    assert body['_timings']['total_seconds'] >= body['_timings']['classify_seconds']
    assert json.loads(err)['mode'] == 'two_step'


def test_route_single_step(desk_artifact):
    body, _ = _run('route', '--query', REPAIR_QUERY, '--model', str(desk_artifact), '--mode', 'single-step')
    assert body['tool_category'] == 'repair_to_parts'


def test_route_backend_failure_exits_nonzero(desk_artifact, monkeypatch):
    def refuse(self, request):
        raise BackendTransportError('connection refused')

    monkeypatch.setattr(HttpChatBackend, 'send', refuse)
    out, err = StringIO(), StringIO()
    with pytest.raises(SystemExit) as excinfo:
        call_command(
            'route', '--query', REPAIR_QUERY, '--model', str(desk_artifact), '--backend', 'http',
            stdout=out, stderr=err,
        )
    assert excinfo.value.code == 1
    assert json.loads(out.getvalue())['tool_category'] == 'repair_to_parts'
    assert json.loads(err.getvalue())['error']['code'] == 'backend_transport_error'


def test_route_blank_query_fails_as_json(desk_artifact):
    err = StringIO()
    with pytest.raises(SystemExit):
        call_command('route', '--query', '  ', '--model', str(desk_artifact), stderr=err)
    assert json.loads(err.getvalue())['error']['code'] == 'invalid_query'


def test_compare_reports_both_modes(desk_artifact):
    body, _ = _run('compare', '--model', str(desk_artifact))
    assert body['n'] == 48
    assert [row['mode'] for row in body['modes']] == ['two_step', 'single_step']
    assert body['modes'][0]['mean_seconds'] < body['modes'][1]['mean_seconds']


def test_compare_text_format(desk_artifact):
    out = StringIO()
    call_command('compare', '--model', str(desk_artifact), '--format', 'text', stdout=out)
    assert 'tool agreement' in out.getvalue()
