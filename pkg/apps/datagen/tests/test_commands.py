import json
from io import StringIO

import pytest
from django.core.management import call_command

from apps.datasets.services import read_samples


def test_gen_data_writes_pending_samples(tmp_path):
    out_path = tmp_path / 'generated.jsonl'
    out = StringIO()
    call_command('gen_data', '--out', str(out_path), '--count', '3', '--seed', '1', stdout=out)

    body = json.loads(out.getvalue())
    assert body['written'] == 24
    assert body['errors'] == []
    samples = read_samples(out_path)
    assert len(samples) == 24
    assert {sample.review_status for sample in samples} == {'pending'}


def test_gen_data_per_tool_counts(tmp_path):
    out_path = tmp_path / 'generated.jsonl'
    out = StringIO()
    call_command('gen_data', '--out', str(out_path), '--counts', 'tsb=2', '--counts', 'others=1', stdout=out)
    assert [sample.tool.value for sample in read_samples(out_path)] == ['tsb', 'tsb', 'others']


@pytest.mark.parametrize('flags', [[], ['--counts', 'tsb=many'], ['--counts', 'banana=2']])
def test_gen_data_rejects_bad_counts(tmp_path, flags):
    err = StringIO()
    with pytest.raises(SystemExit):
        call_command('gen_data', '--out', str(tmp_path / 'x.jsonl'), *flags, stderr=err)
    assert 'error' in json.loads(err.getvalue())
