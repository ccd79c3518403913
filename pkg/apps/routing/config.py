"""
Service settings
Resolves the QUERY_ROUTER settings dict (file and environment, through
python-decouple) plus command-line overrides into one immutable value.
Precedence: flags > environment > .env file > defaults.
"""
from dataclasses import dataclass, fields, replace
from pathlib import Path

from django.conf import settings as django_settings

from apps.extraction.backends import EndpointConfig, InferenceSettings
from query_router.exceptions import ConfigurationError

BACKEND_KINDS = ('mock', 'http')


@dataclass(frozen=True)
class ServiceSettings:
    model_path: str
    prompt_pool_dir: str
    schema_path: str = ''
    backend: str = 'mock'
    endpoint_url: str = 'http://localhost:8000/v1/chat/completions'
    model_name: str = 'llama-3.2-3b-instruct'
    api_key: str = ''
    timeout_seconds: float = 30.0
    max_retries: int = 2
    backoff_seconds: float = 0.5
    prompt_role: str = 'user'
    temperature: float = 0.01
    max_tokens: int = 1024
    parallelism: int = 4
    max_query_bytes: int = 4096
    load_on_startup: bool = False
    bind: str = '127.0.0.1:8000'
    synonyms_path: str = ''

    def __post_init__(self):
        if self.backend not in BACKEND_KINDS:
            raise ConfigurationError(
                f'Unknown backend {self.backend!r}; expected one of {", ".join(BACKEND_KINDS)}',
                setting='backend',
            )
        if self.parallelism < 1:
            raise ConfigurationError(f'parallelism must be at least 1, got {self.parallelism}', setting='parallelism')
        if self.max_retries < 0:
            raise ConfigurationError(f'max_retries must be >= 0, got {self.max_retries}', setting='max_retries')
        InferenceSettings(temperature=self.temperature, max_tokens=self.max_tokens)

    @classmethod
    def from_django(cls, **overrides):
        """Build from settings.QUERY_ROUTER; overrides set to None are ignored."""
        raw = getattr(django_settings, 'QUERY_ROUTER', {})
        values = {}
        for spec in fields(cls):
            key = spec.name.upper()
            if key in raw:
                values[spec.name] = raw[key]
        values.update({key: value for key, value in overrides.items() if value is not None})
        if 'model_path' not in values or 'prompt_pool_dir' not in values:
            raise ConfigurationError('QUERY_ROUTER needs MODEL_PATH and PROMPT_POOL_DIR')
        return cls(**values)

    def with_overrides(self, **overrides):
        return replace(self, **{key: value for key, value in overrides.items() if value is not None})

    @property
    def inference(self):
        return InferenceSettings(temperature=self.temperature, max_tokens=self.max_tokens)

    @property
    def endpoint(self):
        return EndpointConfig(
            url=self.endpoint_url,
            model_name=self.model_name,
            api_key=self.api_key,
            timeout_seconds=self.timeout_seconds,
            max_retries=self.max_retries,
            backoff_seconds=self.backoff_seconds,
            prompt_role=self.prompt_role,
        )

    def check_paths(self, need_model=True):
        """Fail fast when configured files are missing."""
        if need_model and not Path(self.model_path).is_file():
            raise ConfigurationError(
                f'Classifier artifact not found at {self.model_path}; run "manage.py train" or set ROUTER_MODEL_PATH',
                setting='model_path',
            )
        if not Path(self.prompt_pool_dir).is_dir():
            raise ConfigurationError(
                f'Prompt pool directory not found: {self.prompt_pool_dir}',
                setting='prompt_pool_dir',
            )
        for name in ('schema_path', 'synonyms_path'):
            value = getattr(self, name)
            if value and not Path(value).is_file():
                raise ConfigurationError(f'{name} points to a missing file: {value}', setting=name)
