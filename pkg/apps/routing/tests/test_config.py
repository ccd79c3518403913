from concurrent.futures import ThreadPoolExecutor

import pytest

from apps.routing.config import ServiceSettings
from apps.routing.runtime import RouterRuntime, get_runtime, load_runtime
from apps.routing.services import SINGLE_STEP
from query_router.exceptions import ConfigurationError


def _settings(**overrides):
    return ServiceSettings.from_django(**overrides)


def test_from_django_reads_the_settings_dict(settings, tmp_path):
    settings.QUERY_ROUTER = {
        'MODEL_PATH': str(tmp_path / 'model.json'),
        'PROMPT_POOL_DIR': str(tmp_path),
        'BACKEND': 'http',
        'PARALLELISM': 3,
    }
    resolved = _settings(parallelism=None, max_retries=5)
    assert resolved.backend == 'http'
    assert resolved.parallelism == 3
    assert resolved.max_retries == 5
    assert resolved.endpoint.max_retries == 5


def test_from_django_needs_model_and_pool(settings):
    settings.QUERY_ROUTER = {'BACKEND': 'mock'}
    with pytest.raises(ConfigurationError):
        _settings()


@pytest.mark.parametrize('overrides', [
    {'backend': 'grpc'},
    {'parallelism': 0},
    {'max_retries': -1},
    {'temperature': -1.0},
    {'max_tokens': 0},
])
def test_invalid_settings_are_rejected(overrides):
    with pytest.raises(ConfigurationError):
        _settings(**overrides)


def test_with_overrides_ignores_none():
    base = _settings()
    assert base.with_overrides(backend=None, parallelism=8).parallelism == 8
    assert base.with_overrides(backend=None).backend == base.backend


def test_missing_artifact_fails_fast(tmp_path):
    with pytest.raises(ConfigurationError) as excinfo:
        _settings(model_path=str(tmp_path / 'nope.json')).check_paths()
    assert excinfo.value.to_dict()['setting'] == 'model_path'


def test_missing_synonyms_file_fails_fast(desk_artifact, tmp_path):
    resolved = _settings(model_path=str(desk_artifact), synonyms_path=str(tmp_path / 'missing.json'))
    with pytest.raises(ConfigurationError):
        resolved.check_paths()


def test_load_runtime_installs_the_shared_runtime(desk_artifact):
    runtime = load_runtime(_settings(model_path=str(desk_artifact), parallelism=2))
    assert get_runtime() is runtime
    assert runtime.route('Is there any TSB about spark plug fouling in the 2015 Subaru Forester?').entities == {
        'make': 'Subaru', 'model': 'Forester', 'year': 2015, 'issue': 'spark plug fouling',
    }
    assert runtime.route(
        'Are there any complaints or recalls about spark plug misfires in 2017 Kia Optima?', mode=SINGLE_STEP,
    ).tool.value == 'nhtsa'


def test_concurrent_routes_match_serial_routes(desk, desk_artifact):
    runtime = RouterRuntime.from_settings(_settings(model_path=str(desk_artifact), parallelism=4))
    queries = [sample.query for sample in desk.holdout]
    serial = [runtime.route(query).to_public() for query in queries]
    with ThreadPoolExecutor(max_workers=16) as executor:
        concurrent = list(executor.map(lambda query: runtime.route(query).to_public(), queries))
    assert concurrent == serial
