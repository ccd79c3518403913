"""
Shared fixtures: registry, prompt pool, desk dataset, one trained desk
classifier per session, and mock chat backends.
"""
import pytest

from apps.classifier.artifacts import save_model
from apps.classifier.services import TrainConfig, train
from apps.datasets.services import load_desk_dataset
from apps.extraction.backends import ChatBackend, MockChatBackend
from apps.extraction.exceptions import BackendTransportError
from apps.prompts.services import default_prompt_pool
from apps.registry.services import default_registry
from apps.routing.runtime import reset_runtime


class FailingBackend(ChatBackend):
    """Every send fails the way an unreachable endpoint does."""

    name = 'failing'

    def __init__(self):
        self.calls = 0

    def send(self, request):
        self.calls += 1
        raise BackendTransportError('connection refused', url='http://unreachable.invalid')


class ScriptedBackend(ChatBackend):
    """Replies with canned completions in order, repeating the last one."""

    name = 'scripted'

    def __init__(self, *replies):
        self.replies = list(replies)
        self.prompts = []

    def send(self, request):
        self.prompts.append(request.prompt)
        index = min(len(self.prompts), len(self.replies)) - 1
        return self.replies[index]


@pytest.fixture(scope='session')
def registry():
    return default_registry()


@pytest.fixture(scope='session')
def pool(registry):
    return default_prompt_pool()


@pytest.fixture(scope='session')
def desk(registry):
    return load_desk_dataset(registry=registry)


@pytest.fixture(scope='session')
def desk_model(desk):
    return train(desk.train_examples(), TrainConfig())


@pytest.fixture
def mock_backend(desk_model, registry):
    return MockChatBackend(model=desk_model, registry=registry)


@pytest.fixture
def failing_backend():
    return FailingBackend()


@pytest.fixture
def scripted_backend():
    return ScriptedBackend


@pytest.fixture
def desk_artifact(tmp_path, desk_model):
    return save_model(desk_model, tmp_path / 'classifier.json')


@pytest.fixture(autouse=True)
def _clear_runtime():
    reset_runtime()
    yield
    reset_runtime()
