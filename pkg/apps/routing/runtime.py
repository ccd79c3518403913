"""
Service runtime
The loaded model, prompt pool, registry and backend shared by request
handlers. Everything is immutable after load; a restart is the only
reload path.
"""
import logging
import threading
from dataclasses import dataclass

from apps.classifier.artifacts import load_model
from apps.classifier.services import predict
from apps.extraction.backends import HttpChatBackend, MockChatBackend
from apps.prompts.services import load_prompt_pool
from apps.registry.services import load_registry

from .config import ServiceSettings
from .services import SINGLE_STEP, TWO_STEP, check_query, route_single_step, route_two_step

logger = logging.getLogger(__name__)

_runtime = None
_runtime_lock = threading.Lock()


def build_backend(settings, model, registry):
    if settings.backend == 'http':
        logger.info(f"Using HTTP chat backend at {settings.endpoint_url} ({settings.model_name})")
        return HttpChatBackend(settings.endpoint)
    logger.info("Using mock chat backend")
    return MockChatBackend(model=model, registry=registry)


@dataclass
class RouterRuntime:
    settings: ServiceSettings
    registry: object
    model: object
    pool: object
    backend: object

    def __post_init__(self):
        self.slots = threading.BoundedSemaphore(self.settings.parallelism)

    @classmethod
    def from_settings(cls, settings, backend=None):
        settings.check_paths()
        registry = load_registry(settings.schema_path or None)
        model = load_model(settings.model_path)
        pool = load_prompt_pool(settings.prompt_pool_dir, registry)
        return cls(
            settings=settings,
            registry=registry,
            model=model,
            pool=pool,
            backend=backend or build_backend(settings, model, registry),
        )

    def route(self, query, mode=TWO_STEP):
        with self.slots:
            if mode == SINGLE_STEP:
                return route_single_step(query, self.pool, self.registry, self.backend, self.settings.inference)
            return route_two_step(query, self.model, self.pool, self.registry, self.backend, self.settings.inference)

    def classify(self, query):
        check_query(query)
        with self.slots:
            return predict(self.model, query)


def get_runtime():
    return _runtime


def set_runtime(runtime):
    global _runtime
    with _runtime_lock:
        _runtime = runtime
    return runtime


def reset_runtime():
    set_runtime(None)


def load_runtime(settings=None, backend=None):
    settings = settings or ServiceSettings.from_django()
    runtime = RouterRuntime.from_settings(settings, backend=backend)
    logger.info(
        f"Router ready: model {settings.model_path}, pool {settings.prompt_pool_dir}, backend {settings.backend}"
    )
    return set_runtime(runtime)


def load_on_startup():
    """Load the runtime when ROUTER_LOAD_ON_STARTUP is set; healthz reports 503 until then."""
    settings = ServiceSettings.from_django()
    if settings.load_on_startup and get_runtime() is None:
        load_runtime(settings)
