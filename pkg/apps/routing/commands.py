"""
Shared flags for management commands that need a loaded router runtime
"""
from query_router.commands import RouterCommand

from .config import BACKEND_KINDS, ServiceSettings
from .services import SINGLE_STEP, TWO_STEP

MODE_CHOICES = ('two-step', 'single-step')


def mode_from_option(value):
    """CLI spelling ('two-step') to the pipeline constant ('two_step')."""
    return {'two-step': TWO_STEP, 'single-step': SINGLE_STEP}[value]


class RuntimeCommand(RouterCommand):
    """Adds --model/--prompts/--backend style overrides on top of QUERY_ROUTER settings."""

    def add_runtime_arguments(self, parser):
        parser.add_argument('--model', dest='model_path', help='Classifier artifact (ROUTER_MODEL_PATH)')
        parser.add_argument('--prompts', dest='prompt_pool_dir', help='Prompt pool directory (ROUTER_PROMPT_POOL_DIR)')
        parser.add_argument('--schemas', dest='schema_path', help='Entity schema JSON (ROUTER_SCHEMA_PATH)')
        parser.add_argument('--backend', choices=BACKEND_KINDS, help='Extraction backend (ROUTER_BACKEND)')
        parser.add_argument('--endpoint', dest='endpoint_url', help='Chat-completions URL (ROUTER_ENDPOINT_URL)')
        parser.add_argument('--model-name', dest='model_name', help='Model name sent to the endpoint')
        parser.add_argument('--timeout', dest='timeout_seconds', type=float, help='Per-request timeout in seconds')
        parser.add_argument('--max-retries', dest='max_retries', type=int, help='Retries after the first attempt')
        parser.add_argument('--temperature', type=float, help='Decoding temperature')
        parser.add_argument('--max-tokens', dest='max_tokens', type=int, help='Decoding budget')

    def runtime_settings(self, options, **extra):
        keys = (
            'model_path', 'prompt_pool_dir', 'schema_path', 'backend', 'endpoint_url',
            'model_name', 'timeout_seconds', 'max_retries', 'temperature', 'max_tokens',
        )
        overrides = {key: options.get(key) for key in keys}
        overrides.update(extra)
        return ServiceSettings.from_django(**overrides)
