import json
from io import StringIO

import pytest
from django.core.management import call_command

from apps.datasets.services import BUNDLE_DIR


def _run(*args):
    out = StringIO()
    call_command(*args, stdout=out, stderr=StringIO())
    return out.getvalue()


def test_evaluate_two_step_on_holdout(desk_artifact):
    body = json.loads(_run('evaluate', '--model', str(desk_artifact)))
    assert body['mode'] == 'two_step'
    [run] = body['datasets']
    assert run['classification']['n'] == 40
    assert run['classification']['accuracy'] >= 0.85
    assert run['extraction']['n'] == 40
    assert run['route_latency']['n'] == 40


def test_evaluate_single_step_derives_labels_from_routes(desk_artifact):
    canonical = str(BUNDLE_DIR / 'canonical.jsonl')
    body = json.loads(_run('evaluate', '--model', str(desk_artifact), '--data', canonical, '--mode', 'single-step'))
    [run] = body['datasets']
    assert run['classification']['accuracy'] == 1.0
    assert run['extraction']['pass_rate'] == 1.0
    assert run['classification_latency'] is None


def test_evaluate_skip_extraction(desk_artifact):
    body = json.loads(_run('evaluate', '--model', str(desk_artifact), '--skip-extraction'))
    assert body['datasets'][0]['extraction'] is None


def test_evaluate_text_has_a_robustness_table(desk_artifact):
    holdout, canonical = str(BUNDLE_DIR / 'holdout.jsonl'), str(BUNDLE_DIR / 'canonical.jsonl')
    text = _run('evaluate', '--model', str(desk_artifact), '--data', holdout, '--data', canonical, '--format', 'text')
    assert text.count('== ') == 2
    assert 'extraction_pass_rate' in text


def test_evaluate_bad_dataset_line(desk_artifact, tmp_path):
    data = tmp_path / 'bad.jsonl'
    data.write_text('{"query": "x", "tool_category": "tsb", "entities": {}}\n{oops\n')
    err = StringIO()
    with pytest.raises(SystemExit):
        call_command('evaluate', '--model', str(desk_artifact), '--data', str(data), stderr=err)
    error = json.loads(err.getvalue())['error']
    assert error['code'] == 'dataset_format_error'
    assert error['line'] == 2
